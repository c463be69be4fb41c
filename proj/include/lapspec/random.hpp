#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

namespace lapspec {

/// Philox4x32-10 block function (Salmon et al., SC'11). Exposed for the
/// known-answer test.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key);

/// Counter-based random stream. The pair (seed, stream_id) fully determines
/// the sequence of draws, so work split across threads stays reproducible
/// as long as every task derives its own stream_id.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1), 53 bits.
  double uniform();
  double exponential();
  double normal();
  bool bernoulli(double p);
  /// Uniform on {0, ..., n-1}; n must be positive.
  std::size_t index(std::size_t n);
  std::uint64_t poisson(double mean);

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int used_ = 4;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

/// Mixes a task description into a stream id. Used as
/// stream_id = derive_stream_id(kind, i, j, k) so that each independent unit
/// of work owns its stream regardless of scheduling.
std::uint64_t derive_stream_id(std::uint64_t kind, std::uint64_t a, std::uint64_t b = 0,
                               std::uint64_t c = 0);

/// Task kinds fed to derive_stream_id.
namespace stream_kind {
inline constexpr std::uint64_t kMatrix = 1;
inline constexpr std::uint64_t kDiagonalResample = 2;
inline constexpr std::uint64_t kTree = 3;
inline constexpr std::uint64_t kRdeSweep = 4;
inline constexpr std::uint64_t kRdeShadowStart = 5;
inline constexpr std::uint64_t kPointProcess = 6;
}  // namespace stream_kind

}  // namespace lapspec
