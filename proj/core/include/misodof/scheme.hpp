#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "misodof/channel_model.hpp"
#include "misodof/dof_geometry.hpp"

namespace misodof {

enum class Owner { User1, User2, Common };

inline constexpr Owner owner_of(User u) noexcept { return u == User::One ? Owner::User1 : Owner::User2; }

enum class PrecoderKind {
  OrthToUserEstimate,  // unit vector orthogonal to the user's channel estimate
  AlongUserEstimate,   // unit vector along the user's channel estimate
  FirstAntenna,        // [1, 0]^T; layers here are decoded by both receivers
};

struct PrecoderSpec {
  PrecoderKind kind = PrecoderKind::FirstAntenna;
  User user = User::One;  // ignored for FirstAntenna

  static PrecoderSpec orth_to(User u) { return {PrecoderKind::OrthToUserEstimate, u}; }
  static PrecoderSpec along(User u) { return {PrecoderKind::AlongUserEstimate, u}; }
  static PrecoderSpec first_antenna() { return {PrecoderKind::FirstAntenna, User::One}; }

  friend bool operator==(const PrecoderSpec&, const PrecoderSpec&) = default;
};

/// Transmit vector for a precoder given the slot's channel estimates.
ComplexVec2 precoder_vector(const PrecoderSpec& spec, const ChannelRealization& ch);

/// Layer power coefficient * P^exponent - minus_coefficient * P^minus_exponent,
/// floored at zero. Covers allocations of the form P - P^S and P^S/2 - P^{S-a}/4.
struct PowerSpec {
  double coefficient = 1.0;
  double exponent = 1.0;
  double minus_coefficient = 0.0;
  double minus_exponent = 0.0;

  double at(double p) const noexcept;
};

struct SymbolLayer {
  std::string id;
  Owner owner = Owner::Common;
  PrecoderSpec precoder;
  PowerSpec power;
  double encoding_prelog = 0.0;

  bool multicast() const noexcept { return precoder.kind == PrecoderKind::FirstAntenna; }
  double power_exponent() const noexcept { return power.exponent; }
  double power_coefficient() const noexcept { return power.coefficient; }
};

/// Ties the interference overheard by `observer` in `source_slot` to the
/// common layer that carries its quantization.
struct QuantizationLink {
  std::size_t source_slot = 0;
  User observer = User::One;
  std::string interference_id;
  double quant_prelog = 0.0;
  std::string retransmit_layer;
};

struct SlotPlan {
  std::size_t index = 0;
  // Decode order: multicast layers first (strongest first), then each
  // user's private layers strongest first.
  std::vector<SymbolLayer> layers;

  const SymbolLayer* find(const std::string& id) const;
  bool has_private_layers() const;
};

/// A multi-slot transmission scheme unrolled for a fixed number of cycles.
///
/// Slots are numbered from 1 in transmission order: prologue, n_cycles
/// repetitions of a cycle, then an optional closing slot that only carries
/// the last cycle's pending retransmissions.
struct SchemePlan {
  std::string name;
  CsitQuality quality{0.0, 0.0};
  std::size_t n_cycles = 0;
  std::vector<SlotPlan> prologue_slots;
  std::vector<SlotPlan> cycle_slots;  // all cycles, cycle_length() slots each
  std::vector<SlotPlan> closing_slots;
  std::vector<QuantizationLink> links;
  DofPoint predicted_dof;
  double prologue_channel_uses = 0.0;
  double cycle_channel_uses = 0.0;

  std::size_t cycle_length() const noexcept { return n_cycles == 0 ? 0 : cycle_slots.size() / n_cycles; }
  std::span<const SlotPlan> cycle(std::size_t k) const;  // k in [0, n_cycles)
  std::vector<const SlotPlan*> schedule() const;
  const SlotPlan* slot(std::size_t index) const;
  const SymbolLayer* find_layer(const std::string& id, std::size_t* slot_index = nullptr) const;

  /// prologue_channel_uses + n_cycles * cycle_channel_uses.
  double channel_uses() const noexcept {
    return prologue_channel_uses + static_cast<double>(n_cycles) * cycle_channel_uses;
  }
  /// Channel uses counted from the slots: one per slot that carries fresh
  /// symbols, plus the common-layer pre-logs of closing slots.
  double scheduled_channel_uses() const;
  /// Encoding pre-log sums of each user's layers over the whole schedule,
  /// divided by channel_uses(): the DoF reached with n_cycles repetitions.
  DofPoint finite_dof() const;
};

/// Encoding pre-log sums (user 1, user 2) over a set of slots.
DofPoint prelog_sums(std::span<const SlotPlan> slots);

inline constexpr const char* kPresetGes12Asym = "ges12-asym";
inline constexpr const char* kPresetCaseI = "case-i";
inline constexpr const char* kPresetCaseII = "case-ii";
inline constexpr const char* kPresetCaseIIAlt = "case-ii-alt";
inline constexpr const char* kPresetScZf = "sc-zf";

/// Three-slot symmetric-CSIT scheme run with asymmetric exponents.
SchemePlan build_ges12_asym(const CsitQuality& quality);
/// Requires 2*alpha2 - alpha1 >= 1. Reaches ((1+alpha1)/2, 1).
SchemePlan build_case_i(const CsitQuality& quality, std::size_t n_cycles);
/// Requires 2*alpha2 - alpha1 < 1. Reaches the two-line intersection point.
SchemePlan build_case_ii(const CsitQuality& quality, std::size_t n_cycles);
/// Requires 2*alpha2 - alpha1 < 1. Case-i flow with u in the second slot at
/// P^{alpha2}; reaches (alpha2, 1).
SchemePlan build_case_ii_alt(const CsitQuality& quality, std::size_t n_cycles);
/// Superposition plus zero-forcing in every slot; reaches (1, alpha1).
SchemePlan build_sc_zf(const CsitQuality& quality, std::size_t n_cycles = 1);

/// Builds a preset by name; "auto" picks case-i or case-ii from the quality.
SchemePlan build_preset(const std::string& name, const CsitQuality& quality, std::size_t n_cycles);
std::vector<std::string> preset_names();

/// Structural checks: per-slot power budget, pre-log signs, link
/// consistency and causality. Empty result means the plan is valid.
std::vector<std::string> validate_plan(const SchemePlan& plan);

/// JSON tree mirroring the plan's fields.
std::string plan_to_json(const SchemePlan& plan, int indent = 2);
/// Fixed-width per-slot layer tables.
std::string plan_tables(const SchemePlan& plan);

const char* to_string(Owner owner);
std::string to_string(const PrecoderSpec& spec);

}  // namespace misodof
