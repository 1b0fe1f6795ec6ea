#include "doctest.h"

#include <cmath>
#include <map>
#include <stdexcept>

#include "misodof/rate_evaluator.hpp"

using namespace misodof;

namespace {

std::vector<SnrPoint> grid(const CsitQuality& q, std::initializer_list<double> dbs = {60, 80, 100, 120}) {
  std::vector<SnrPoint> g;
  for (double db : dbs) g.push_back(SnrPoint::from_db(db, q));
  return g;
}

// Slope of a per-layer quantity along the upper half of the grid.
template <class F>
double layer_slope(const std::vector<RateLedger>& ledgers, F&& value) {
  std::vector<double> x, y;
  for (std::size_t i = ledgers.size() / 2; i < ledgers.size(); ++i) {
    x.push_back(ledgers[i].snr.log2_p());
    y.push_back(value(ledgers[i]));
  }
  return ls_slope(x, y);
}

std::vector<RateLedger> ledgers_for(const SchemePlan& plan, std::size_t trials) {
  std::vector<RateLedger> out;
  MonteCarloOptions o;
  o.n_trials = trials;
  for (const auto& s : grid(plan.quality)) out.push_back(evaluate_plan(plan, s, o));
  return out;
}

ComplexVec2 orth(const ComplexVec2& v) {
  const double n = std::sqrt(std::norm(v.x0) + std::norm(v.x1));
  return {-std::conj(v.x1) / n, std::conj(v.x0) / n};
}

}  // namespace

TEST_CASE("log det oracle") {
  const Complex a1(0.3, -1.2), a2(2.0, 0.5), b1(-0.7, 0.1), b2(0.4, 0.9);
  const std::vector<Complex> a{a1, a2, b1, b2};  // columns (a1,a2) and (b1,b2)
  const double na = std::norm(a1) + std::norm(a2), nb = std::norm(b1) + std::norm(b2);
  const double c = std::norm(std::conj(a1) * b1 + std::conj(a2) * b2);
  CHECK(log2_det_identity_plus_gram(a, 2, 2) == doctest::Approx(std::log2((1 + na) * (1 + nb) - c)).epsilon(1e-12));
  CHECK(log2_det_identity_plus_gram(std::vector<Complex>{a1, a2}, 2, 1) ==
        doctest::Approx(std::log2(1 + na)).epsilon(1e-12));
  CHECK(log2_det_identity_plus_gram({}, 2, 0) == 0.0);
  CHECK_THROWS_AS(log2_det_identity_plus_gram(a, 3, 2), std::invalid_argument);
}

TEST_CASE("log det survives nearly collinear columns") {
  const double big = 1e9;
  const std::vector<Complex> a{big, 0.0, big, 1e-3};
  // det(I + A^H A) = 1 + |a|^2 + |b|^2 + |a|^2 |b|^2 - |a^H b|^2, last terms expanded by hand.
  const double want = std::log2(1 + 2 * big * big + 1e-6 + big * big * 1e-6);
  CHECK(log2_det_identity_plus_gram(a, 2, 2) == doctest::Approx(want).epsilon(1e-9));
}

TEST_CASE("single common layer is point-to-point capacity") {
  SlotPlan slot{1, {{"c", Owner::Common, PrecoderSpec::first_antenna(), {1.0, 1.0, 0.0, 0.0}, 1.0}}};
  ChannelRealization ch;
  ch.h_true = ch.h_est = {Complex(1, 0), Complex(0.5, 0.5)};
  ch.g_true = ch.g_est = {Complex(0, 2), Complex(0, 0)};
  const SnrPoint snr(1e6, CsitQuality(1, 1));
  const auto r = rate_common_layer(slot, slot.layers[0], ch, snr);
  CHECK(r.user1 == doctest::Approx(std::log2(1 + 1e6)));
  CHECK(r.user2 == doctest::Approx(std::log2(1 + 4e6)));
  CHECK(r.deliverable() == r.user1);
  const SymbolLayer stranger{"x", Owner::User1, PrecoderSpec::orth_to(User::Two), {}, 1.0};
  CHECK_THROWS_AS(rate_common_layer(slot, stranger, ch, snr), std::invalid_argument);
}

TEST_CASE("stacked commons decode strongest first") {
  SlotPlan slot{1,
                {{"a", Owner::Common, PrecoderSpec::first_antenna(), {1.0, 1.0, 1.0, 0.5}, 0.5},
                 {"b", Owner::Common, PrecoderSpec::first_antenna(), {1.0, 0.5, 0.0, 0.0}, 0.5}}};
  ChannelRealization ch;
  ch.h_true = ch.g_true = {Complex(1, 0), Complex(0, 0)};
  const SnrPoint snr(1e4, CsitQuality(1, 1));
  const double pa = 1e4 - 100, pb = 100;
  CHECK(rate_common_layer(slot, slot.layers[0], ch, snr).user1 == doctest::Approx(std::log2(1 + pa / (1 + pb))));
  CHECK(rate_common_layer(slot, slot.layers[1], ch, snr).user2 == doctest::Approx(std::log2(1 + pb)));
}

TEST_CASE("zero-forcing symbol rate") {
  ChannelRealization ch;
  ch.h_true = ch.h_est = {Complex(0.8, 0.1), Complex(-0.3, 1.1)};
  ch.g_true = ch.g_est = {Complex(1.0, -0.2), Complex(0.4, 0.6)};
  const SnrPoint snr(1e5, CsitQuality(1, 1));
  const SymbolLayer u{"u", Owner::User1, PrecoderSpec::orth_to(User::Two), {1.0, 1.0, 0.0, 0.0}, 1.0};
  const double gain = std::norm(inner(ch.h_true, orth(ch.g_est)));
  CHECK(rate_zf_symbol(u, User::One, ch, snr, {}) == doctest::Approx(std::log2(1 + gain * 1e5)));
  CHECK(rate_zf_symbol(u, User::One, ch, snr, {1.0, 2.0}) == doctest::Approx(std::log2(1 + gain * 1e5 / 4)));
  // Perfect CSIT: no leakage at the other receiver.
  CHECK(std::norm(inner(ch.g_true, precoder_vector(u.precoder, ch))) < 1e-24);
}

TEST_CASE("joint vector rate") {
  ChannelRealization ch;
  ch.h_true = ch.h_est = {Complex(0.8, 0.1), Complex(-0.3, 1.1)};
  ch.g_true = ch.g_est = {Complex(1.0, -0.2), Complex(0.4, 0.6)};
  const SnrPoint snr(1e3, CsitQuality(1, 1));
  std::vector<SymbolLayer> v{{"v1", Owner::User2, PrecoderSpec::orth_to(User::One), {0.0, 1.0, 0.0, 0.0}, 1.0},
                             {"v2", Owner::User2, PrecoderSpec::along(User::One), {0.0, 1.0, 0.0, 0.0}, 1.0}};
  const std::vector<ObservationRow> rows{{ch.g_true, 1.0}, {ch.h_true, 1.0}};
  CHECK(rate_joint_vector(v, rows, ch, snr) == 0.0);

  v[0].power.coefficient = v[1].power.coefficient = 1.0;
  // Oracle: 2x2 determinant written out.
  const ComplexVec2 w1 = orth(ch.h_est), w2 = unit(ch.h_est);
  const Complex a11 = inner(ch.g_true, w1) * std::sqrt(1e3), a21 = inner(ch.h_true, w1) * std::sqrt(1e3 / 2);
  const Complex a12 = inner(ch.g_true, w2) * std::sqrt(1e3), a22 = inner(ch.h_true, w2) * std::sqrt(1e3 / 2);
  const double n1 = std::norm(a11) + std::norm(a21), n2 = std::norm(a12) + std::norm(a22);
  const double c = std::norm(std::conj(a11) * a12 + std::conj(a21) * a22);
  const std::vector<ObservationRow> noisy{{ch.g_true, 1.0}, {ch.h_true, 2.0}};
  CHECK(rate_joint_vector(v, noisy, ch, snr) == doctest::Approx(std::log2((1 + n1) * (1 + n2) - c)));

  const std::vector<ObservationRow> singular{{ch.g_true, 0.0}};
  CHECK_THROWS_AS(rate_joint_vector(v, singular, ch, snr), std::invalid_argument);
}

TEST_CASE("sc-zf ledger recomposes from direct formulas") {
  for (auto [a1, a2] : {std::pair{1.0, 1.0}, {0.5, 1.0}}) {
    const CsitQuality q(a1, a2);
    const auto plan = build_sc_zf(q, 1);
    const SnrPoint snr = SnrPoint::from_db(50, q);
    MonteCarloOptions o;
    o.n_trials = 1;
    o.seed = 1234;
    const auto ledger = evaluate_plan(plan, snr, o);

    Rng rng = Rng::for_stream(o.seed, 0);
    const auto ch = sample_channel(snr, rng);
    const double p = snr.p();
    const auto& slot = plan.cycle_slots[0];
    // At alpha1 = 1 the common layer has no pre-log and is not built.
    const SymbolLayer* xc = slot.find("xc1");
    CHECK((xc == nullptr) == (a1 == 1.0));
    const double pc = xc ? xc->power.at(p) : 0.0;
    const double pu = slot.find("u1")->power.at(p), pv = slot.find("v1")->power.at(p);
    const ComplexVec2 wu = orth(ch.g_est), wv = orth(ch.h_est);
    double mic[2];
    for (int k = 0; k < 2; ++k) {
      const ComplexVec2& c = k == 0 ? ch.h_true : ch.g_true;
      const double below = std::norm(inner(c, wu)) * pu + std::norm(inner(c, wv)) * pv;
      mic[k] = std::log2(1 + std::norm(c.x0) * pc / (1 + below));
    }
    const double ru =
        std::log2(1 + std::norm(inner(ch.h_true, wu)) * pu / (1 + std::norm(inner(ch.h_true, wv)) * pv));
    const double rv =
        std::log2(1 + std::norm(inner(ch.g_true, wv)) * pv / (1 + std::norm(inner(ch.g_true, wu)) * pu));
    CHECK(std::abs(ledger.user_rate[0] - (std::min(mic[0], mic[1]) + ru)) < 1e-12);
    CHECK(std::abs(ledger.user_rate[1] - rv) < 1e-12);
    CHECK(ledger.channel_uses == 1.0);
  }
}

TEST_CASE("ledger totals are sums of owned layers and nonnegative") {
  const auto plan = build_case_ii(CsitQuality(0.3, 0.5), 3);
  MonteCarloOptions o;
  o.n_trials = 100;
  for (double p : {1.001, 10.0, 1e6}) {
    const auto ledger = evaluate_plan(plan, SnrPoint(p, plan.quality), o);
    double s[2] = {0, 0};
    for (const auto* slot : plan.schedule()) {
      for (const auto& l : slot->layers) {
        const double r = ledger.per_symbol_rate.at(l.id);
        CHECK(r >= 0.0);
        if (l.owner == Owner::User1) s[0] += r;
        if (l.owner == Owner::User2) s[1] += r;
      }
    }
    CHECK(ledger.user_rate[0] == doctest::Approx(s[0]));
    CHECK(ledger.user_rate[1] == doctest::Approx(s[1]));
    CHECK(ledger.channel_uses == doctest::Approx(plan.channel_uses()));
    if (p < 2) {
      CHECK(ledger.rate_per_use()[0] < 1.0);
      CHECK(ledger.rate_per_use()[1] < 1.0);
    }
  }
}

TEST_CASE("evaluation rejects invalid input") {
  auto plan = build_case_ii(CsitQuality(0.3, 0.5), 2);
  MonteCarloOptions o;
  o.n_trials = 0;
  CHECK_THROWS_AS(evaluate_plan(plan, SnrPoint(100, plan.quality), o), std::invalid_argument);
  o.n_trials = 5;
  plan.links[1].source_slot = 9;
  CHECK_THROWS_AS(evaluate_plan(plan, SnrPoint(100, plan.quality), o), std::invalid_argument);
}

TEST_CASE("results do not depend on the thread count") {
  const auto plan = build_case_i(CsitQuality(0.2, 0.8), 3);
  MonteCarloOptions a, b;
  a.n_trials = b.n_trials = 300;
  a.threads = 1;
  b.threads = 4;
  const SnrPoint snr = SnrPoint::from_db(70, plan.quality);
  const auto la = evaluate_plan(plan, snr, a), lb = evaluate_plan(plan, snr, b);
  CHECK(la.user_rate == lb.user_rate);
  CHECK(la.per_symbol_rate == lb.per_symbol_rate);
  CHECK(la.trial_rate_per_use == lb.trial_rate_per_use);
}

TEST_CASE("case-ii rates respect the outer bound at P = 1e8") {
  const auto plan = build_case_ii(CsitQuality(0.3, 0.5), 50);
  MonteCarloOptions o;
  o.n_trials = 2000;
  const SnrPoint snr(1e8, plan.quality);
  const auto r = evaluate_plan(plan, snr, o).rate_per_use();
  CHECK(std::isfinite(r[0]));
  CHECK(r[0] > 0);
  CHECK(r[1] > 0);
  CHECK((r[0] + 2 * r[1]) / snr.log2_p() <= 2.5 + 0.1);
}

TEST_CASE("property: user rates are nondecreasing in P") {
  for (const auto& name : {"case-ii", "case-ii-alt", "sc-zf", "ges12-asym"}) {
    const auto plan = build_preset(name, CsitQuality(0.3, 0.5), 3);
    MonteCarloOptions o;
    o.n_trials = 200;
    std::array<double, 2> last{0, 0};
    for (const auto& s : grid(plan.quality, {1, 10, 20, 40, 60, 80, 100, 120})) {
      const auto r = evaluate_plan(plan, s, o).rate_per_use();
      CHECK(r[0] >= last[0]);
      CHECK(r[1] >= last[1]);
      last = r;
    }
  }
}

TEST_CASE("property: every layer's rate slope matches its encoding pre-log") {
  struct Case {
    const char* name;
    double a1, a2;
  };
  for (const auto& c : {Case{"case-ii", 0.3, 0.5}, Case{"case-i", 0.2, 0.8}, Case{"case-ii-alt", 0.3, 0.5},
                        Case{"sc-zf", 0.3, 0.5}, Case{"ges12-asym", 0.3, 0.5}, Case{"case-ii", 0.4, 0.4},
                        Case{"case-i", 0.0, 1.0}, Case{"case-ii", 0.0, 0.0}}) {
    const auto plan = build_preset(c.name, CsitQuality(c.a1, c.a2), 2);
    const auto ledgers = ledgers_for(plan, 300);
    for (const auto* slot : plan.schedule()) {
      for (const auto& l : slot->layers) {
        CAPTURE(c.name);
        CAPTURE(l.id);
        const double s = layer_slope(ledgers, [&](const RateLedger& r) { return r.per_symbol_rate.at(l.id); });
        CHECK(std::abs(s - l.encoding_prelog) <= 0.05);
        if (l.owner == Owner::Common) {
          // The carrier must deliver at least what its link asks for.
          const double mi =
              layer_slope(ledgers, [&](const RateLedger& r) { return r.common_layer_mi.at(l.id).deliverable(); });
          CHECK(mi >= l.encoding_prelog - 0.05);
        }
      }
    }
  }
}

TEST_CASE("vector slopes in the case-ii steady-state slot") {
  const auto plan = build_case_ii(CsitQuality(0.3, 0.5), 1);
  const auto ledgers = ledgers_for(plan, 300);
  auto sum = [&](const char* a, const char* b) {
    return layer_slope(ledgers, [&](const RateLedger& r) { return r.per_symbol_rate.at(a) + r.per_symbol_rate.at(b); });
  };
  CHECK(sum("v4_1", "v4_2") == doctest::Approx(1.3).epsilon(0.05 / 1.3));
  CHECK(sum("u4_1", "u4_2") == doctest::Approx(1.1).epsilon(0.05 / 1.1));
}

TEST_CASE("property: residual interference stays at noise level") {
  const auto plan = build_case_ii(CsitQuality(0.3, 0.5), 2);
  MonteCarloOptions o;
  o.n_trials = 500;
  std::vector<double> x;
  std::map<std::string, std::vector<double>> y;
  for (const auto& s : grid(plan.quality)) {
    x.push_back(s.log2_p());
    for (const auto& [id, v] : residual_power_probe(plan, s, o)) {
      CHECK(v == doctest::Approx(1.0).epsilon(0.1));
      y[id].push_back(std::log2(v));
    }
  }
  CHECK(y.size() == plan.links.size());
  for (const auto& [id, v] : y) CHECK(std::abs(ls_slope(x, v)) < 0.05);
}

TEST_CASE("property: an under-quantized link leaves growing residual") {
  auto plan = build_case_ii(CsitQuality(0.3, 0.5), 2);
  plan.links[0].quant_prelog -= 0.1;
  MonteCarloOptions o;
  o.n_trials = 300;
  std::vector<double> x, y;
  for (const auto& s : grid(plan.quality)) {
    x.push_back(s.log2_p());
    y.push_back(std::log2(residual_power_probe(plan, s, o).at(plan.links[0].retransmit_layer)));
  }
  CHECK(ls_slope(x, y) > 0.05);
}

TEST_CASE("estimate_dof grid preconditions") {
  const auto plan = build_sc_zf(CsitQuality(0.3, 0.5), 1);
  MonteCarloOptions o;
  o.n_trials = 10;
  CHECK_THROWS_AS(estimate_dof(plan, grid(plan.quality, {60, 120}), o), std::invalid_argument);
  CHECK_THROWS_AS(estimate_dof(plan, grid(plan.quality, {60, 80, 90}), o), std::invalid_argument);
  CHECK_THROWS_AS(estimate_dof(plan, grid(plan.quality, {60, 100, 80, 120}), o), std::invalid_argument);
  const auto e = estimate_dof(plan, grid(plan.quality), o);
  CHECK(e.points.size() == 4);
  CHECK(e.ledgers.size() == 4);
  CHECK(std::isfinite(e.slope.d1));
  CHECK(e.std_error[0] >= 0);
}

TEST_CASE("ls_slope") {
  const std::vector<double> x{1, 2, 3, 4}, y{3, 5, 7, 9};
  CHECK(ls_slope(x, y) == doctest::Approx(2.0));
}
