#pragma once

#include <string_view>

#include "spbench/errors.hpp"

namespace spbench::testing {

inline constexpr std::string_view mm_canonical =
    "%%MatrixMarket matrix coordinate real general\n"
    "% the 3x3 test matrix\n"
    "3 3 5\n"
    "1 1 2\n"
    "3 3 5\n"
    "1 3 1\n"
    "\n"
    "2 2 3\n"
    "3 1 4\n";

inline constexpr std::string_view mm_symmetric =
    "%%MatrixMarket matrix coordinate real symmetric\n"
    "2 2 2\n"
    "1 1 4\n"
    "2 1 1\n";

inline constexpr std::string_view mm_pattern =
    "%%MatrixMarket matrix coordinate pattern general\n"
    "3 3 1\n"
    "2 3\n";

struct MalformedFixture {
    std::string_view name;
    std::string_view text;
    ParseErrorKind kind;
    std::size_t line;
};

inline constexpr MalformedFixture mm_malformed[] = {
    {"bad banner",
     "%MatrixMarket matrix coordinate real general\n1 1 1\n1 1 1\n",
     ParseErrorKind::bad_banner, 1},
    {"count mismatch",
     "%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 1\n2 2 1\n",
     ParseErrorKind::count_mismatch, 4},
    {"out-of-range index",
     "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n3 1 1\n",
     ParseErrorKind::index_out_of_bounds, 4},
    {"bad token",
     "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.5\n2 2 x7\n",
     ParseErrorKind::bad_token, 4},
    {"truncation",
     "%%MatrixMarket matrix coordinate real general\n3 3 3\n1 1 1\n2 2 1\n",
     ParseErrorKind::truncated, 4},
};

}  // namespace spbench::testing
