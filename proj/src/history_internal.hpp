#ifndef CHROMATIC_SRC_HISTORY_INTERNAL_HPP
#define CHROMATIC_SRC_HISTORY_INTERNAL_HPP

#include <atomic>
#include <span>

#include "chromatic/record.hpp"

namespace chromatic::history::detail {

// Performs the field-update CAS of a committing SCX. While capture is on the
// CAS and the log append happen under one lock.
bool update_field(std::atomic<Record*>& field, Record* old_value,
                  Record* new_value, const Record& target, std::uint32_t slot,
                  std::span<Record* const> removed,
                  std::span<Record* const> fresh);

}  // namespace chromatic::history::detail

#endif  // CHROMATIC_SRC_HISTORY_INTERNAL_HPP
