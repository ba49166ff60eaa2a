#pragma once

#include <cstddef>
#include <utility>

namespace panolab {

namespace detail {
struct any_field {
  template <typename T>
  constexpr operator T() const noexcept;
};

template <typename T, std::size_t... I>
constexpr bool brace_constructible_from(std::index_sequence<I...>) {
  return requires { T{(void(I), any_field{})...}; };
}

template <typename T, std::size_t N>
constexpr std::size_t aggregate_arity_impl() {
  if constexpr (brace_constructible_from<T>(std::make_index_sequence<N + 1>{})) {
    return aggregate_arity_impl<T, N + 1>();
  } else {
    return N;
  }
}
}  // namespace detail

/// Number of members of a flat aggregate of scalars.
template <typename T>
inline constexpr std::size_t aggregate_arity_v = detail::aggregate_arity_impl<T, 0>();

}  // namespace panolab
