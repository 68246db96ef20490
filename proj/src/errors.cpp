#include "spbench/errors.hpp"

namespace spbench {
namespace {

std::string join_missing(const std::vector<std::string>& keys)
{
    std::string msg = "missing keys:";
    for (const auto& k : keys) {
        msg += ' ';
        msg += k;
    }
    return msg;
}

}  // namespace

KeyMismatch::KeyMismatch(std::vector<std::string> missing)
    : Error(join_missing(missing)), missing_(std::move(missing))
{}

const char* to_string(ParseErrorKind kind) noexcept
{
    switch (kind) {
    case ParseErrorKind::bad_banner:
        return "bad_banner";
    case ParseErrorKind::unsupported_header:
        return "unsupported_header";
    case ParseErrorKind::bad_size_line:
        return "bad_size_line";
    case ParseErrorKind::bad_token:
        return "bad_token";
    case ParseErrorKind::index_out_of_bounds:
        return "index_out_of_bounds";
    case ParseErrorKind::count_mismatch:
        return "count_mismatch";
    case ParseErrorKind::truncated:
        return "truncated";
    case ParseErrorKind::io:
        return "io";
    case ParseErrorKind::schema_mismatch:
        return "schema_mismatch";
    }
    return "unknown";
}

ParseError::ParseError(ParseErrorKind kind, std::size_t line,
                       const std::string& what)
    : Error("line " + std::to_string(line) + ": " + to_string(kind) + ": " +
            what),
      kind_(kind),
      line_(line)
{}

}  // namespace spbench
