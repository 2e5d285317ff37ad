#include "hemoda/random.hpp"

namespace hemoda {

KeyedStream::KeyedStream(std::uint64_t seed, StreamTag tag,
                         std::initializer_list<std::uint64_t> key) {
  // Absorb each word through the mixer so order and length both matter.
  auto absorb = [](std::uint64_t h, std::uint64_t w) {
    return SplitMix64::mix(h ^ (w + SplitMix64::kGolden + (h << 6) + (h >> 2)));
  };
  std::uint64_t h = SplitMix64::mix(seed + SplitMix64::kGolden);
  h = absorb(h, static_cast<std::uint64_t>(tag));
  for (auto k : key) h = absorb(h, k);
  h = absorb(h, key.size());
  engine_ = SplitMix64(h);
}

std::uint64_t KeyedStream::below(std::uint64_t n) {
  // Rejection sampling keeps the draw unbiased and platform independent.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t x = engine_();
  while (x >= limit) x = engine_();
  return x % n;
}

}  // namespace hemoda
