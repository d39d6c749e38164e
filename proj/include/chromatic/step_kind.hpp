#ifndef CHROMATIC_STEP_KIND_HPP
#define CHROMATIC_STEP_KIND_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

namespace chromatic {

// The rebalancing transformations, without orientation.
enum class StepShape : std::uint8_t {
  kBlk,
  kRb1,
  kRb2,
  kPush,
  kW1,
  kW2,
  kW3,
  kW4,
  kW5,
  kW6,
  kW7,
};
inline constexpr std::size_t kStepShapeCount = 11;

/// A transformation with its orientation. BLK is symmetric, so it has a
/// single (unmirrored) kind; every other shape has a plain and a mirrored
/// kind, for 21 kinds in total.
struct StepKind {
  StepShape shape = StepShape::kBlk;
  bool mirrored = false;

  friend bool operator==(StepKind, StepKind) = default;
};

inline constexpr std::size_t kStepKindCount = 21;

[[nodiscard]] constexpr std::size_t index_of(StepKind k) noexcept {
  if (k.shape == StepShape::kBlk) return 0;
  return 1 + 2 * (static_cast<std::size_t>(k.shape) - 1) + (k.mirrored ? 1 : 0);
}

[[nodiscard]] constexpr StepKind step_kind_at(std::size_t index) noexcept {
  if (index == 0) return {};
  return {static_cast<StepShape>(1 + (index - 1) / 2), (index - 1) % 2 == 1};
}

[[nodiscard]] constexpr std::array<StepKind, kStepKindCount> all_step_kinds() {
  std::array<StepKind, kStepKindCount> out{};
  for (std::size_t i = 0; i < kStepKindCount; ++i) out[i] = step_kind_at(i);
  return out;
}

// "BLK", "RB1", "RB1s", ...
[[nodiscard]] std::string_view name_of(StepKind k) noexcept;
[[nodiscard]] std::optional<StepKind> parse_step_kind(std::string_view name);

}  // namespace chromatic

#endif  // CHROMATIC_STEP_KIND_HPP
