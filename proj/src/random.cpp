#include "tlsfluct/random.hpp"

namespace tlsfluct {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

std::uint64_t derive_key(std::uint64_t parent, std::uint64_t id) {
  return mix64(mix64(parent + kGolden) ^ mix64(id * kGolden + 0x632be59bd9b4e019ULL));
}

}  // namespace

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t stream_id)
    : RandomStream(seed, stream_id, derive_key(seed, stream_id)) {}

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t stream_id, std::uint64_t key)
    : seed_(seed), stream_id_(stream_id), key_(key) {}

RandomStream RandomStream::substream(std::uint64_t child_id) const {
  return RandomStream(seed_, child_id, derive_key(key_, child_id));
}

RandomStream::result_type RandomStream::operator()() {
  ++counter_;
  return mix64(key_ + counter_ * kGolden);
}

double RandomStream::uniform() {
  return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

double RandomStream::uniform_positive() {
  return static_cast<double>(((*this)() >> 11) + 1) * 0x1.0p-53;
}

}  // namespace tlsfluct
