#include "bsbm/rng.hpp"

#include <array>

#include "bsbm/errors.hpp"

namespace bsbm {

namespace {

std::mt19937_64 seeded_engine(std::uint64_t master, const StreamId& id) {
  auto lo = [](std::uint64_t x) { return static_cast<std::uint32_t>(x); };
  auto hi = [](std::uint64_t x) { return static_cast<std::uint32_t>(x >> 32); };
  std::seed_seq seq{lo(master),        hi(master),
                    lo(id.grid),       hi(id.grid),
                    lo(id.replication), hi(id.replication),
                    lo(id.substream),  hi(id.substream)};
  return std::mt19937_64(seq);
}

}  // namespace

RngStream::RngStream(std::uint64_t master_seed, StreamId id)
    : master_seed_(master_seed), id_(id), engine_(seeded_engine(master_seed, id)) {}

RngStream RngStream::substream(std::uint64_t k) const {
  StreamId id = id_;
  id.substream = k;
  return RngStream(master_seed_, id);
}

double RngStream::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t RngStream::below(std::uint64_t n) {
  if (n == 0) throw InvalidArgument("below() needs a positive bound");
  // Rejection sampling on the top of the range keeps the draw unbiased.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

}  // namespace bsbm
