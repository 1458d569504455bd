#pragma once

#include <cstdint>
#include <initializer_list>

namespace blip {

// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Child seed for a named sub-task, e.g. derive_seed(master, {L, p, trial, 2}).
// Depends only on its arguments, never on scheduling order.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = mix64(master);
  for (auto v : path) h = mix64(h ^ mix64(v));
  return h;
}

}  // namespace blip
