#pragma once

#include <cstdint>
#include <random>

namespace bsbm {

// Identifies one independent random stream inside a Monte Carlo run.
struct StreamId {
  std::uint64_t grid = 0;
  std::uint64_t replication = 0;
  std::uint64_t substream = 0;

  friend bool operator==(const StreamId&, const StreamId&) = default;
};

/// Reproducible random stream keyed by (master seed, stream id).
///
/// The engine is seeded through std::seed_seq, whose mixing is fully
/// specified by the standard, and every draw below is built from raw
/// 64-bit engine output, so a given key yields the same sequence on every
/// conforming implementation. Distinct keys give decorrelated sequences.
class RngStream {
 public:
  explicit RngStream(std::uint64_t master_seed, StreamId id = {});

  std::uint64_t master_seed() const { return master_seed_; }
  const StreamId& id() const { return id_; }

  // Fresh stream sharing this stream's key but a different substream slot.
  RngStream substream(std::uint64_t k) const;

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform();

  // Uniform on (0, 1].
  double uniform_open_low() { return 1.0 - uniform(); }

  // Uniform integer in [0, n); n must be positive.
  std::uint64_t below(std::uint64_t n);

 private:
  std::uint64_t master_seed_;
  StreamId id_;
  std::mt19937_64 engine_;
};

}  // namespace bsbm
