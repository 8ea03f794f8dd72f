#pragma once

#include "sqsk/data.hpp"
#include "sqsk/sketch.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

namespace sqsk {

/**
 * LIBSVM / SVMlight text: one observation per line, "label idx:val ...", with
 * 1-based strictly increasing indices. Blank lines and '#' comments are skipped.
 * Observations become columns of a sparse X; n is the largest index seen unless
 * `min_features` is larger. Errors are InputError messages of the form
 * "<source>:<line>: <reason>".
 */
Dataset read_libsvm(std::istream& in, const std::string& source = "<stream>", Index min_features = 0);
Dataset load_libsvm(const std::filesystem::path& path, Index min_features = 0);

/// Writes with 17 significant digits so that load(write(d)) reproduces d exactly.
void write_libsvm(std::ostream& out, const Dataset& data);
void save_libsvm(const std::filesystem::path& path, const Dataset& data);

/// CSV with a header row, one observation per row, last column the response.
/// Header names (minus the last) become feature names.
Dataset read_csv(std::istream& in, const std::string& source = "<stream>");
Dataset load_csv(const std::filesystem::path& path);

enum class DataFormat
{
    libsvm,
    csv,
};

DataFormat parse_format(const std::string& name);
Dataset load_dataset(const std::filesystem::path& path, DataFormat format);

/**
 * Binary sketch cache: "SQSK", u32 version, u64 n, m, k, P then Q as
 * row-major little-endian doubles, then meta (u64 power_iters, u64 seed,
 * f64 spectral_error). Views are saved materialized.
 */
inline constexpr std::uint32_t kSketchFileVersion = 1;

void write_sketch(std::ostream& out, const Sketch& sk);
Sketch read_sketch(std::istream& in, const std::string& source = "<stream>");
void save_sketch(const Sketch& sk, const std::filesystem::path& path);
Sketch load_sketch(const std::filesystem::path& path);

} // namespace sqsk
