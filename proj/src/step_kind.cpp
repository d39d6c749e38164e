#include "chromatic/step_kind.hpp"

namespace chromatic {

namespace {
constexpr std::array<std::string_view, kStepKindCount> kNames = {
    "BLK", "RB1", "RB1s", "RB2", "RB2s", "PUSH", "PUSHs", "W1", "W1s", "W2", "W2s",
    "W3",  "W3s", "W4",   "W4s", "W5",   "W5s",  "W6",    "W6s", "W7", "W7s",
};
}  // namespace

std::string_view name_of(StepKind k) noexcept { return kNames[index_of(k)]; }

std::optional<StepKind> parse_step_kind(std::string_view name) {
  for (std::size_t i = 0; i < kNames.size(); ++i)
    if (kNames[i] == name) return step_kind_at(i);
  return std::nullopt;
}

}  // namespace chromatic
