#pragma once

#include <array>
#include <cstdint>

namespace randlyap {

/// Philox4x32-10 counter-based bijection (Salmon et al., SC'11).
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter bijection(Counter ctr, Key key) {
    for (int r = 0; r < 10; ++r) {
      if (r > 0) {
        key[0] += 0x9E3779B9u;
        key[1] += 0xBB67AE85u;
      }
      std::uint64_t p0 = std::uint64_t{0xD2511F53u} * ctr[0];
      std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
    }
    return ctr;
  }
};

/// Sequential view of one Philox stream. The key is the seed, counter words
/// 0..1 hold the block position and words 2..3 the stream id, so distinct
/// (seed, stream) pairs never share a counter block.
class Stream {
 public:
  Stream(std::uint64_t seed, std::uint64_t stream_id) : seed_(seed), stream_(stream_id) {}

  std::uint64_t next_u64() {
    if (idx_ == 2) refill();
    return buf_[idx_++];
  }

  /// Uniform on [0, 1) with 53 random bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_; }
  std::uint64_t position() const { return block_; }

 private:
  void refill() {
    Philox4x32::Counter ctr = {static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                               static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
    Philox4x32::Key key = {static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)};
    auto out = Philox4x32::bijection(ctr, key);
    buf_[0] = (std::uint64_t{out[1]} << 32) | out[0];
    buf_[1] = (std::uint64_t{out[3]} << 32) | out[2];
    ++block_;
    idx_ = 0;
  }

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buf_{};
  int idx_ = 2;
};

/// Child stream id for per-item work under a base stream; ids stay disjoint
/// as long as base < 2^32 and index < 2^32.
inline std::uint64_t substream(std::uint64_t base, std::uint64_t index) { return (base << 32) | (index & 0xFFFFFFFFu); }

/// Uniform noise on [-epsilon, epsilon] drawn from an identified stream.
struct NoiseModel {
  double epsilon = 0.01;
  std::uint64_t seed = 1;
  std::uint64_t stream_id = 0;

  Stream stream() const { return Stream(seed, stream_id); }
  Stream substream(std::uint64_t index) const { return Stream(seed, randlyap::substream(stream_id, index)); }
  double draw(Stream& s) const { return epsilon * (2.0 * s.next_double() - 1.0); }
};

}  // namespace randlyap
