#ifndef CHROMATIC_CONFIG_HPP
#define CHROMATIC_CONFIG_HPP

#include <cstddef>
#include <cstdint>

namespace chromatic {

// Upper bound on concurrently registered threads (OS threads or explorer
// fibers). Thread ids are recycled when a thread exits.
inline constexpr std::size_t kMaxThreads = 512;

// Mutable child links per record. Every structure built on the primitives
// here is a binary down-tree.
inline constexpr std::size_t kArity = 2;

// Capacity of one SCX: the largest V sequence (W3/W4 steps) has six records.
inline constexpr std::size_t kMaxScxRecords = 8;

// Capacity of the per-update LLX sequence sigma.
inline constexpr std::size_t kMaxSigma = 16;

// Capacity of the freshly allocated node set N of one update.
inline constexpr std::size_t kMaxFresh = 8;

#if defined(CHROMATIC_INSTRUMENTED) && CHROMATIC_INSTRUMENTED
inline constexpr bool kInstrumented = true;
#else
inline constexpr bool kInstrumented = false;
#endif

}  // namespace chromatic

#endif  // CHROMATIC_CONFIG_HPP
