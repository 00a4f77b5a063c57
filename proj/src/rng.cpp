#include "bsmmr/rng.hpp"

#include <sstream>
#include <vector>

#include "bsmmr/error.hpp"

namespace bsmmr {

Rng Rng::stream(std::uint64_t master, std::initializer_list<std::uint64_t> ids) {
  std::vector<std::uint32_t> words;
  auto push = [&](std::uint64_t v) {
    words.push_back(static_cast<std::uint32_t>(v));
    words.push_back(static_cast<std::uint32_t>(v >> 32));
  };
  push(master);
  for (auto id : ids) push(id);
  std::seed_seq seq(words.begin(), words.end());
  Rng rng;
  rng.engine_.seed(seq);
  return rng;
}

std::string Rng::state() const {
  std::ostringstream os;
  os << engine_;
  return os.str();
}

void Rng::restore(const std::string& state) {
  std::istringstream is(state);
  is >> engine_;
  if (!is) throw Error(ErrorCode::Io, "malformed rng state");
}

}  // namespace bsmmr
