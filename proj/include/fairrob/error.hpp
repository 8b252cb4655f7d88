#pragma once

#include <sstream>
#include <stdexcept>
#include <string>

namespace fairrob {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {
inline void stream_all(std::ostringstream&) {}

template <typename T, typename... Rest>
void stream_all(std::ostringstream& oss, T&& v, Rest&&... rest) {
  oss << std::forward<T>(v);
  stream_all(oss, std::forward<Rest>(rest)...);
}
}  // namespace detail

template <typename... Args>
[[noreturn]] void fail(Args&&... args) {
  std::ostringstream oss;
  detail::stream_all(oss, std::forward<Args>(args)...);
  throw Error(oss.str());
}

template <typename... Args>
void require(bool cond, Args&&... args) {
  if (!cond) fail(std::forward<Args>(args)...);
}

}  // namespace fairrob
