#ifndef SGLAB_VERSION_HPP
#define SGLAB_VERSION_HPP

namespace sglab {

inline constexpr const char* kVersion = "0.1.0";

} // namespace sglab

#endif
