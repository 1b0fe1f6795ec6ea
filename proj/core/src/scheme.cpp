#include "misodof/scheme.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace misodof {

namespace {

// Layers and links whose pre-log evaluates at or below this are omitted.
constexpr double kDropPrelog = 1e-12;

std::string interference_name(std::size_t slot, User observer) {
  return "eta_" + std::to_string(slot) + "_" + std::to_string(index_of(observer) + 1);
}

std::string quantized_name(std::size_t slot, User observer) {
  return "eta_hat_" + std::to_string(slot) + "_" + std::to_string(index_of(observer) + 1);
}

class PlanWriter {
 public:
  explicit PlanWriter(SchemePlan& plan) : plan_(plan) {}

  static void add(SlotPlan& slot, std::string id, Owner owner, PrecoderSpec precoder, PowerSpec power,
                  double prelog) {
    if (prelog <= kDropPrelog) return;
    slot.layers.push_back(SymbolLayer{std::move(id), owner, precoder, power, prelog});
  }

  // Registers the quantization of the interference user `observer` overhears in
  // `source`, and returns the common layer that will carry it.
  SymbolLayer quantize(std::size_t source, User observer, double prelog, PowerSpec carrier_power) {
    SymbolLayer carrier{quantized_name(source, observer), Owner::Common, PrecoderSpec::first_antenna(),
                        carrier_power, prelog};
    if (prelog > kDropPrelog) {
      plan_.links.push_back(QuantizationLink{source, observer, interference_name(source, observer), prelog,
                                             carrier.id});
    }
    return carrier;
  }

  static void add_common(SlotPlan& slot, const SymbolLayer& common) {
    if (common.encoding_prelog > kDropPrelog) slot.layers.push_back(common);
  }

 private:
  SchemePlan& plan_;
};

std::string slot_id(const char* symbol, std::size_t t) { return symbol + std::to_string(t); }
std::string slot_id(const char* symbol, std::size_t t, int i) {
  return symbol + std::to_string(t) + "_" + std::to_string(i);
}

// Slot 1: Table-I template at S = 1 with both users sending two symbols.
SlotPlan first_slot(const CsitQuality& q) {
  const double a1 = q.alpha1(), a2 = q.alpha2();
  SlotPlan s{1, {}};
  PlanWriter::add(s, "u1_1", Owner::User1, PrecoderSpec::orth_to(User::Two), {0.5, 1.0, 0.25, 1.0 - a2}, 1.0);
  PlanWriter::add(s, "u1_2", Owner::User1, PrecoderSpec::along(User::Two), {0.25, 1.0 - a2}, 1.0 - a2);
  PlanWriter::add(s, "v1_1", Owner::User2, PrecoderSpec::orth_to(User::One), {0.5, 1.0, 0.25, 1.0 - a1}, 1.0);
  PlanWriter::add(s, "v1_2", Owner::User2, PrecoderSpec::along(User::One), {0.25, 1.0 - a1}, 1.0 - a1);
  return s;
}

// Slots 1-2 shared by every multi-slot preset; returns the slot-3 carrier of
// user 2's slot-1 interference.
SymbolLayer write_prologue(SchemePlan& plan, PlanWriter& w) {
  const double a1 = plan.quality.alpha1(), a2 = plan.quality.alpha2();
  plan.prologue_slots.push_back(first_slot(plan.quality));
  const SymbolLayer eta11 = w.quantize(1, User::One, 1.0 - a1, {1.0, 1.0, 1.0, a1});
  const SymbolLayer eta12 = w.quantize(1, User::Two, 1.0 - a2, {1.0, 1.0, 1.0, a2});

  SlotPlan s2{2, {}};
  PlanWriter::add_common(s2, eta11);
  PlanWriter::add(s2, "u2", Owner::User1, PrecoderSpec::orth_to(User::Two), {0.5, a1}, a1);
  PlanWriter::add(s2, "v2", Owner::User2, PrecoderSpec::orth_to(User::One), {0.5, a1}, a1);
  plan.prologue_slots.push_back(std::move(s2));
  return eta12;
}

// New symbols at level alpha2: one symbol to user 1, a two-symbol vector to
// user 2 whose overheard part reaches user 1 at P^delta.
void add_alpha2_level_symbols(SlotPlan& s, const CsitQuality& q) {
  const double a2 = q.alpha2(), d = q.delta();
  const std::size_t t = s.index;
  PlanWriter::add(s, slot_id("u", t), Owner::User1, PrecoderSpec::orth_to(User::Two), {0.5, a2}, a2);
  PlanWriter::add(s, slot_id("v", t, 1), Owner::User2, PrecoderSpec::orth_to(User::One), {0.5, a2, 0.25, d}, a2);
  PlanWriter::add(s, slot_id("v", t, 2), Owner::User2, PrecoderSpec::along(User::One), {0.25, d}, d);
}

void add_user2_vector_upper(SlotPlan& s, const CsitQuality& q) {
  const double a2 = q.alpha2(), d = q.delta();
  const std::size_t t = s.index;
  PlanWriter::add(s, slot_id("v", t, 1), Owner::User2, PrecoderSpec::orth_to(User::One),
                  {0.5, 1.0 - d, 0.25, 1.0 - a2}, 1.0 - d);
  PlanWriter::add(s, slot_id("v", t, 2), Owner::User2, PrecoderSpec::along(User::One), {0.25, 1.0 - a2}, 1.0 - a2);
}

void check_cycles(std::size_t n_cycles) {
  if (n_cycles == 0) throw std::invalid_argument("n_cycles must be positive");
}

// Two-slot cycle shared by case-i and case-ii-alt. `u_exponent` is the power
// and rate of user 1's symbol in the second slot of each cycle.
SchemePlan build_two_slot_cycle(const CsitQuality& q, std::size_t n_cycles, const char* name, double u_exponent) {
  SchemePlan plan;
  plan.name = name;
  plan.quality = q;
  plan.n_cycles = n_cycles;
  const double a2 = q.alpha2(), d = q.delta();
  PlanWriter w(plan);
  SymbolLayer pending = write_prologue(plan, w);

  std::size_t t = 3;
  for (std::size_t k = 0; k < n_cycles; ++k, t += 2) {
    SlotPlan a{t, {}};
    PlanWriter::add_common(a, pending);
    add_alpha2_level_symbols(a, q);
    const SymbolLayer eta_a = w.quantize(t, User::One, d, {1.0, 1.0, 1.0, 1.0 - d});

    SlotPlan b{t + 1, {}};
    PlanWriter::add_common(b, eta_a);
    PlanWriter::add(b, slot_id("u", t + 1), Owner::User1, PrecoderSpec::orth_to(User::Two), {0.5, u_exponent},
                    u_exponent);
    add_user2_vector_upper(b, q);
    pending = w.quantize(t + 1, User::One, 1.0 - a2, {1.0, 1.0, 1.0, a2});

    plan.cycle_slots.push_back(std::move(a));
    plan.cycle_slots.push_back(std::move(b));
  }
  SlotPlan closing{t, {}};
  PlanWriter::add_common(closing, pending);
  if (!closing.layers.empty()) plan.closing_slots.push_back(std::move(closing));

  plan.prologue_channel_uses = 3.0 - a2;
  plan.cycle_channel_uses = 2.0;
  return plan;
}

}  // namespace

double PowerSpec::at(double p) const noexcept {
  double v = coefficient * std::pow(p, exponent);
  if (minus_coefficient != 0.0) v -= minus_coefficient * std::pow(p, minus_exponent);
  return std::max(v, 0.0);
}

ComplexVec2 precoder_vector(const PrecoderSpec& spec, const ChannelRealization& ch) {
  switch (spec.kind) {
    case PrecoderKind::OrthToUserEstimate:
      return orth_complement(ch.estimate(spec.user));
    case PrecoderKind::AlongUserEstimate:
      return unit(ch.estimate(spec.user));
    case PrecoderKind::FirstAntenna:
      break;
  }
  return {Complex{1.0, 0.0}, Complex{0.0, 0.0}};
}

const SymbolLayer* SlotPlan::find(const std::string& id) const {
  auto it = std::find_if(layers.begin(), layers.end(), [&](const SymbolLayer& l) { return l.id == id; });
  return it == layers.end() ? nullptr : &*it;
}

bool SlotPlan::has_private_layers() const {
  return std::any_of(layers.begin(), layers.end(), [](const SymbolLayer& l) { return !l.multicast(); });
}

std::span<const SlotPlan> SchemePlan::cycle(std::size_t k) const {
  const std::size_t len = cycle_length();
  if (k >= n_cycles) throw std::out_of_range("SchemePlan::cycle: index out of range");
  return std::span<const SlotPlan>(cycle_slots).subspan(k * len, len);
}

std::vector<const SlotPlan*> SchemePlan::schedule() const {
  std::vector<const SlotPlan*> out;
  out.reserve(prologue_slots.size() + cycle_slots.size() + closing_slots.size());
  for (const auto& s : prologue_slots) out.push_back(&s);
  for (const auto& s : cycle_slots) out.push_back(&s);
  for (const auto& s : closing_slots) out.push_back(&s);
  return out;
}

const SlotPlan* SchemePlan::slot(std::size_t index) const {
  for (const SlotPlan* s : schedule()) {
    if (s->index == index) return s;
  }
  return nullptr;
}

const SymbolLayer* SchemePlan::find_layer(const std::string& id, std::size_t* slot_index) const {
  for (const SlotPlan* s : schedule()) {
    if (const SymbolLayer* l = s->find(id)) {
      if (slot_index) *slot_index = s->index;
      return l;
    }
  }
  return nullptr;
}

double SchemePlan::scheduled_channel_uses() const {
  double uses = 0.0;
  for (const SlotPlan* s : schedule()) {
    if (s->has_private_layers()) {
      uses += 1.0;
    } else {
      for (const auto& l : s->layers) uses += l.encoding_prelog;
    }
  }
  return uses;
}

DofPoint prelog_sums(std::span<const SlotPlan> slots) {
  DofPoint sum;
  for (const auto& s : slots) {
    for (const auto& l : s.layers) {
      if (l.owner == Owner::User1) sum.d1 += l.encoding_prelog;
      if (l.owner == Owner::User2) sum.d2 += l.encoding_prelog;
    }
  }
  return sum;
}

DofPoint SchemePlan::finite_dof() const {
  DofPoint total = prelog_sums(prologue_slots);
  const DofPoint cyc = prelog_sums(cycle_slots);
  const double uses = channel_uses();
  return {(total.d1 + cyc.d1) / uses, (total.d2 + cyc.d2) / uses};
}

SchemePlan build_ges12_asym(const CsitQuality& q) {
  SchemePlan plan;
  plan.name = kPresetGes12Asym;
  plan.quality = q;
  const double a1 = q.alpha1(), a2 = q.alpha2();
  PlanWriter w(plan);
  const SymbolLayer eta12 = write_prologue(plan, w);

  // u3 sees user 2's symbol at P^delta and is therefore only encoded at alpha1.
  SlotPlan s3{3, {}};
  PlanWriter::add_common(s3, eta12);
  PlanWriter::add(s3, "u3", Owner::User1, PrecoderSpec::orth_to(User::Two), {0.5, a2}, a1);
  PlanWriter::add(s3, "v3", Owner::User2, PrecoderSpec::orth_to(User::One), {0.5, a2}, a2);
  plan.prologue_slots.push_back(std::move(s3));

  plan.predicted_dof = {(2.0 + 2.0 * a1 - a2) / 3.0, (2.0 + a2) / 3.0};
  plan.prologue_channel_uses = 3.0;
  plan.cycle_channel_uses = 0.0;
  return plan;
}

SchemePlan build_case_i(const CsitQuality& q, std::size_t n_cycles) {
  check_cycles(n_cycles);
  if (!q.max_sum_on_upper_edge()) {
    throw std::domain_error("case-i requires 2*alpha2 - alpha1 >= 1; use case-ii or case-ii-alt");
  }
  SchemePlan plan = build_two_slot_cycle(q, n_cycles, kPresetCaseI, 1.0 - q.delta());
  plan.predicted_dof = {(1.0 + q.alpha1()) / 2.0, 1.0};
  return plan;
}

SchemePlan build_case_ii_alt(const CsitQuality& q, std::size_t n_cycles) {
  check_cycles(n_cycles);
  if (q.max_sum_on_upper_edge()) {
    throw std::domain_error("case-ii-alt requires 2*alpha2 - alpha1 < 1; use case-i");
  }
  SchemePlan plan = build_two_slot_cycle(q, n_cycles, kPresetCaseIIAlt, q.alpha2());
  plan.predicted_dof = {q.alpha2(), 1.0};
  return plan;
}

SchemePlan build_case_ii(const CsitQuality& q, std::size_t n_cycles) {
  check_cycles(n_cycles);
  if (q.max_sum_on_upper_edge()) {
    throw std::domain_error("case-ii requires 2*alpha2 - alpha1 < 1; use case-i");
  }
  SchemePlan plan;
  plan.name = kPresetCaseII;
  plan.quality = q;
  plan.n_cycles = n_cycles;
  const double a1 = q.alpha1(), a2 = q.alpha2(), d = q.delta();
  PlanWriter w(plan);
  std::vector<SymbolLayer> pending{write_prologue(plan, w)};

  std::size_t t = 3;
  for (std::size_t k = 0; k < n_cycles; ++k, t += 3) {
    SlotPlan a{t, {}};
    for (const auto& c : pending) PlanWriter::add_common(a, c);
    add_alpha2_level_symbols(a, q);
    const SymbolLayer eta_a = w.quantize(t, User::One, d, {1.0, 1.0, 1.0, 1.0 - d});

    // Both users receive two symbols; both overhear interference.
    const std::size_t tb = t + 1;
    SlotPlan b{tb, {}};
    PlanWriter::add_common(b, eta_a);
    PlanWriter::add(b, slot_id("u", tb, 1), Owner::User1, PrecoderSpec::orth_to(User::Two),
                    {0.5, 1.0 - d, 0.25, 1.0 - d - a2}, 1.0 - d);
    PlanWriter::add(b, slot_id("u", tb, 2), Owner::User1, PrecoderSpec::along(User::Two), {0.25, 1.0 - d - a2},
                    1.0 - d - a2);
    add_user2_vector_upper(b, q);
    const SymbolLayer eta_b1 = w.quantize(tb, User::One, 1.0 - a2, {1.0, 1.0, 1.0, a2});
    const SymbolLayer eta_b2 = w.quantize(tb, User::Two, 1.0 - d - a2, {1.0, 1.0, 1.0, d + a2});

    const std::size_t tc = t + 2;
    SlotPlan c{tc, {}};
    PlanWriter::add_common(c, eta_b1);
    add_alpha2_level_symbols(c, q);
    const SymbolLayer eta_c = w.quantize(tc, User::One, d, {1.0, d + a2, 1.0, a2});

    // The next cycle's first slot stacks both pending retransmissions on
    // disjoint power intervals, decoded strongest first.
    pending = {eta_b2, eta_c};

    plan.cycle_slots.push_back(std::move(a));
    plan.cycle_slots.push_back(std::move(b));
    plan.cycle_slots.push_back(std::move(c));
  }
  SlotPlan closing{t, {}};
  for (const auto& c : pending) PlanWriter::add_common(closing, c);
  if (!closing.layers.empty()) plan.closing_slots.push_back(std::move(closing));

  plan.predicted_dof = {(2.0 + 2.0 * a1 - a2) / 3.0, (2.0 + 2.0 * a2 - a1) / 3.0};
  plan.prologue_channel_uses = 3.0 - a2;
  plan.cycle_channel_uses = 3.0;
  return plan;
}

SchemePlan build_sc_zf(const CsitQuality& q, std::size_t n_cycles) {
  check_cycles(n_cycles);
  SchemePlan plan;
  plan.name = kPresetScZf;
  plan.quality = q;
  plan.n_cycles = n_cycles;
  const double a1 = q.alpha1();
  for (std::size_t t = 1; t <= n_cycles; ++t) {
    SlotPlan s{t, {}};
    PlanWriter::add(s, slot_id("xc", t), Owner::User1, PrecoderSpec::first_antenna(), {1.0, 1.0, 1.0, a1},
                    1.0 - a1);
    PlanWriter::add(s, slot_id("u", t), Owner::User1, PrecoderSpec::orth_to(User::Two), {0.5, a1}, a1);
    PlanWriter::add(s, slot_id("v", t), Owner::User2, PrecoderSpec::orth_to(User::One), {0.5, a1}, a1);
    plan.cycle_slots.push_back(std::move(s));
  }
  plan.predicted_dof = {1.0, a1};
  plan.prologue_channel_uses = 0.0;
  plan.cycle_channel_uses = 1.0;
  return plan;
}

std::vector<std::string> preset_names() {
  return {kPresetGes12Asym, kPresetCaseI, kPresetCaseII, kPresetCaseIIAlt, kPresetScZf};
}

SchemePlan build_preset(const std::string& name, const CsitQuality& q, std::size_t n_cycles) {
  if (name == "auto") {
    return q.max_sum_on_upper_edge() ? build_case_i(q, n_cycles) : build_case_ii(q, n_cycles);
  }
  if (name == kPresetGes12Asym) return build_ges12_asym(q);
  if (name == kPresetCaseI) return build_case_i(q, n_cycles);
  if (name == kPresetCaseII) return build_case_ii(q, n_cycles);
  if (name == kPresetCaseIIAlt) return build_case_ii_alt(q, n_cycles);
  if (name == kPresetScZf) return build_sc_zf(q, n_cycles);
  throw std::invalid_argument("unknown scheme preset: " + name);
}

std::vector<std::string> validate_plan(const SchemePlan& plan) {
  std::vector<std::string> diags;
  auto diag = [&](std::size_t slot, const std::string& msg) {
    diags.push_back("slot " + std::to_string(slot) + ": " + msg);
  };

  std::set<std::string> ids;
  std::set<std::size_t> slot_indices;
  for (const SlotPlan* s : plan.schedule()) {
    if (!slot_indices.insert(s->index).second) diag(s->index, "duplicate slot index");

    std::set<std::pair<Owner, std::string>> private_keys;
    std::vector<std::pair<double, double>> terms;  // (exponent, signed coefficient)
    for (const auto& l : s->layers) {
      if (!ids.insert(l.id).second) diag(s->index, "duplicate layer id " + l.id);
      if (!(l.encoding_prelog >= 0.0)) diag(s->index, "negative encoding prelog on " + l.id);
      if (l.owner == Owner::Common && !l.multicast()) {
        diag(s->index, "common layer " + l.id + " must use the first antenna");
      }
      if (!l.multicast() && !private_keys.insert({l.owner, to_string(l.precoder)}).second) {
        diag(s->index, "more than one layer for (" + std::string(to_string(l.owner)) + ", " +
                           to_string(l.precoder) + ")");
      }
      const PowerSpec& p = l.power;
      if (p.exponent < -1e-12 || p.exponent > 1.0 + 1e-12) {
        diag(s->index, "power exponent of " + l.id + " outside [0, 1]");
      }
      if (!(p.coefficient > 0.0)) diag(s->index, "nonpositive power coefficient on " + l.id);
      if (p.minus_coefficient != 0.0 &&
          (p.minus_exponent > p.exponent + 1e-12 ||
           (std::abs(p.minus_exponent - p.exponent) <= 1e-12 && p.minus_coefficient >= p.coefficient))) {
        diag(s->index, "power of " + l.id + " is not positive for large P");
      }
      terms.emplace_back(p.exponent, p.coefficient);
      if (p.minus_coefficient != 0.0) terms.emplace_back(p.minus_exponent, -p.minus_coefficient);
    }

    // Leading term of sum_l power_l(P) must not exceed P.
    std::sort(terms.begin(), terms.end(), [](auto& x, auto& y) { return x.first > y.first; });
    for (std::size_t i = 0; i < terms.size();) {
      const double e = terms[i].first;
      double net = 0.0;
      std::size_t j = i;
      for (; j < terms.size() && std::abs(terms[j].first - e) <= 1e-9; ++j) net += terms[j].second;
      if (std::abs(net) > 1e-9) {
        if (e > 1.0 + 1e-9 || (std::abs(e - 1.0) <= 1e-9 && net > 1.0 + 1e-9)) {
          diag(s->index, "power budget exceeded");
        }
        break;
      }
      i = j;
    }
  }

  std::set<std::string> carried_by_links;
  for (const auto& link : plan.links) {
    const SlotPlan* src = plan.slot(link.source_slot);
    if (!src) {
      diags.push_back("link " + link.interference_id + ": source slot " + std::to_string(link.source_slot) +
                      " does not exist");
      continue;
    }
    const Owner interferer = owner_of(other(link.observer));
    const bool has_source = std::any_of(src->layers.begin(), src->layers.end(), [&](const SymbolLayer& l) {
      return l.owner == interferer && !l.multicast();
    });
    if (!has_source) {
      diags.push_back("link " + link.interference_id + ": no interfering layers in source slot");
    }
    if (!(link.quant_prelog >= 0.0)) diags.push_back("link " + link.interference_id + ": negative quant prelog");

    std::size_t carrier_slot = 0;
    const SymbolLayer* carrier = plan.find_layer(link.retransmit_layer, &carrier_slot);
    if (!carrier) {
      diags.push_back("link " + link.interference_id + ": retransmit layer " + link.retransmit_layer +
                      " not found");
      continue;
    }
    if (carrier->owner != Owner::Common) {
      diags.push_back("link " + link.interference_id + ": retransmit layer is not a common layer");
    }
    if (carrier_slot <= link.source_slot) {
      diags.push_back("link " + link.interference_id + ": causality violated (retransmitted in slot " +
                      std::to_string(carrier_slot) + ")");
    }
    if (!carried_by_links.insert(link.retransmit_layer).second) {
      diags.push_back("link " + link.interference_id + ": retransmit layer shared by several links");
    }
  }
  for (const SlotPlan* s : plan.schedule()) {
    for (const auto& l : s->layers) {
      if (l.owner == Owner::Common && !carried_by_links.count(l.id)) {
        diag(s->index, "common layer " + l.id + " carries no quantization link");
      }
    }
  }
  return diags;
}

const char* to_string(Owner owner) {
  switch (owner) {
    case Owner::User1:
      return "user1";
    case Owner::User2:
      return "user2";
    case Owner::Common:
      break;
  }
  return "common";
}

std::string to_string(const PrecoderSpec& spec) {
  const std::string u = std::to_string(index_of(spec.user) + 1);
  switch (spec.kind) {
    case PrecoderKind::OrthToUserEstimate:
      return "orth_est" + u;
    case PrecoderKind::AlongUserEstimate:
      return "along_est" + u;
    case PrecoderKind::FirstAntenna:
      break;
  }
  return "first_antenna";
}

namespace {

nlohmann::json slot_json(const SlotPlan& s) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : s.layers) {
    layers.push_back({{"id", l.id},
                      {"owner", to_string(l.owner)},
                      {"precoder", to_string(l.precoder)},
                      {"power_coefficient", l.power.coefficient},
                      {"power_exponent", l.power.exponent},
                      {"power_minus_coefficient", l.power.minus_coefficient},
                      {"power_minus_exponent", l.power.minus_exponent},
                      {"encoding_prelog", l.encoding_prelog}});
  }
  return {{"index", s.index}, {"layers", layers}};
}

std::string power_text(const PowerSpec& p) {
  char buf[96];
  if (p.minus_coefficient != 0.0) {
    std::snprintf(buf, sizeof buf, "%.4g*P^%.4g - %.4g*P^%.4g", p.coefficient, p.exponent, p.minus_coefficient,
                  p.minus_exponent);
  } else {
    std::snprintf(buf, sizeof buf, "%.4g*P^%.4g", p.coefficient, p.exponent);
  }
  return buf;
}

}  // namespace

std::string plan_to_json(const SchemePlan& plan, int indent) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["name"] = plan.name;
  j["quality"] = {{"alpha1", plan.quality.alpha1()}, {"alpha2", plan.quality.alpha2()}};
  j["n_cycles"] = plan.n_cycles;
  auto slots = [](const std::vector<SlotPlan>& v) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& s : v) arr.push_back(slot_json(s));
    return arr;
  };
  j["prologue_slots"] = slots(plan.prologue_slots);
  j["cycle_slots"] = slots(plan.cycle_slots);
  j["closing_slots"] = slots(plan.closing_slots);
  nlohmann::json links = nlohmann::json::array();
  for (const auto& l : plan.links) {
    links.push_back({{"source_slot", l.source_slot},
                     {"observer", index_of(l.observer) + 1},
                     {"interference_id", l.interference_id},
                     {"quant_prelog", l.quant_prelog},
                     {"retransmit_layer", l.retransmit_layer}});
  }
  j["links"] = links;
  j["predicted_dof"] = {plan.predicted_dof.d1, plan.predicted_dof.d2};
  j["prologue_channel_uses"] = plan.prologue_channel_uses;
  j["cycle_channel_uses"] = plan.cycle_channel_uses;
  return j.dump(indent);
}

std::string plan_tables(const SchemePlan& plan) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%s  alpha1=%.4g alpha2=%.4g  cycles=%zu  predicted DoF=(%.6g, %.6g)\n",
                plan.name.c_str(), plan.quality.alpha1(), plan.quality.alpha2(), plan.n_cycles,
                plan.predicted_dof.d1, plan.predicted_dof.d2);
  out << line;
  for (const SlotPlan* s : plan.schedule()) {
    out << "slot " << s->index << '\n';
    std::snprintf(line, sizeof line, "  %-14s %-7s %-14s %-34s %s\n", "symbol", "owner", "precoder", "power",
                  "prelog");
    out << line;
    for (const auto& l : s->layers) {
      std::snprintf(line, sizeof line, "  %-14s %-7s %-14s %-34s %.6g\n", l.id.c_str(), to_string(l.owner),
                    to_string(l.precoder).c_str(), power_text(l.power).c_str(), l.encoding_prelog);
      out << line;
    }
  }
  out << "links\n";
  for (const auto& l : plan.links) {
    std::snprintf(line, sizeof line, "  %-10s slot %-4zu observer %d  prelog %-8.6g -> %s\n",
                  l.interference_id.c_str(), l.source_slot, index_of(l.observer) + 1, l.quant_prelog,
                  l.retransmit_layer.c_str());
    out << line;
  }
  return out.str();
}

}  // namespace misodof
