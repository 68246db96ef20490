#pragma once

/// @file ingest.hpp
/// @brief Matrix Market I/O, corpus directory scanning and synthetic
/// matrix generators.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "spbench/matrix.hpp"

namespace spbench {

enum class MmField { real, integer, pattern };
enum class MmSymmetry { general, symmetric };

struct MatrixHeader {
    MmField field = MmField::real;
    MmSymmetry symmetry = MmSymmetry::general;
};

struct MatrixMarket {
    MatrixHeader header;
    CooMatrix matrix;
};

/// Parses a coordinate Matrix Market stream. Indices are converted to
/// 0-based, symmetric files are expanded to full storage and pattern entries
/// get value 1.0. Any defect raises ParseError carrying the line number;
/// nothing is returned on failure.
MatrixMarket read_matrix_market(std::istream& in);
MatrixMarket read_matrix_market_file(const std::filesystem::path& path);

/// Writes `m` as `coordinate real general` with 17 significant digits, which
/// round-trips every double.
void write_matrix_market(std::ostream& out, const CooMatrix& m);

struct CorpusEntry {
    std::string id;
    std::filesystem::path path;
    MatrixHeader header;
    Dims dims;
    RowStats stats;
};

struct CorpusSkip {
    std::filesystem::path path;
    std::string reason;
};

struct CorpusScan {
    std::vector<CorpusEntry> entries;
    std::vector<CorpusSkip> skipped;
};

/// Parses every `*.mtx` file in `dir` (not recursive). Files that fail to
/// parse are reported in `skipped`. Both lists are ordered by file name and
/// ids are file stems. Throws Error if the directory cannot be read.
CorpusScan scan_corpus(const std::filesystem::path& dir, std::size_t workers = 1);

/// Five-point Laplacian on an n x n grid (n^2 unknowns).
CsrMatrix gen_laplacian_2d(index_t n);

/// Row i receives exactly row_nnz[i] entries at distinct uniformly drawn
/// columns with values uniform in (-1, 1). Deterministic for a given seed.
CsrMatrix gen_random_rowdist(index_t num_rows, index_t num_cols,
                             std::span<const index_t> row_nnz, std::uint64_t seed);

}  // namespace spbench
