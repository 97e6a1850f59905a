#ifndef MLTRL_VERSION_HPP
#define MLTRL_VERSION_HPP

namespace mltrl {

inline constexpr const char* kVersion = "0.1.0";

} // namespace mltrl

#endif
