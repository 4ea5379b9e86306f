#ifndef PAIRWISE_EM_VERSION_HPP
#define PAIRWISE_EM_VERSION_HPP

#include <string_view>

namespace pairwise_em {

inline constexpr std::string_view version = "0.1.0";

} // namespace pairwise_em

#endif // PAIRWISE_EM_VERSION_HPP
