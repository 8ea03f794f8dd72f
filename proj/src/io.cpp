#include "sqsk/io.hpp"

#include "sqsk/errors.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <vector>

namespace sqsk {

namespace {

[[noreturn]] void fail_at(const std::string& source, std::size_t line, const std::string& reason)
{
    std::ostringstream os;
    os << source << ":" << line << ": " << reason;
    throw InputError(os.str());
}

std::string_view trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool parse_double(std::string_view tok, double& out)
{
    if (tok.empty()) return false;
    if (tok.front() == '+') tok.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
    return ec == std::errc() && ptr == tok.data() + tok.size();
}

bool parse_index(std::string_view tok, long long& out)
{
    if (tok.empty()) return false;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
    return ec == std::errc() && ptr == tok.data() + tok.size();
}

std::ifstream open_in(const std::filesystem::path& path, std::ios::openmode mode = std::ios::in)
{
    std::ifstream in(path, mode);
    if (!in) throw InputError("cannot open " + path.string());
    return in;
}

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = std::ios::out)
{
    std::ofstream out(path, mode);
    if (!out) throw InputError("cannot write " + path.string());
    return out;
}

std::vector<std::string_view> split(std::string_view s, char sep)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = s.find(sep, start);
        out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

template <class T>
T to_little(T v)
{
    if constexpr (std::endian::native == std::endian::big) {
        auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
        std::reverse(bytes.begin(), bytes.end());
        v = std::bit_cast<T>(bytes);
    }
    return v;
}

template <class T>
void put(std::ostream& out, T v)
{
    v = to_little(v);
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void put_f64(std::ostream& out, double v)
{
    put(out, std::bit_cast<std::uint64_t>(v));
}

template <class T>
bool get(std::istream& in, T& v)
{
    if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) return false;
    v = to_little(v);
    return true;
}

bool get_f64(std::istream& in, double& v)
{
    std::uint64_t bits = 0;
    if (!get(in, bits)) return false;
    v = std::bit_cast<double>(bits);
    return true;
}

} // namespace

Dataset read_libsvm(std::istream& in, const std::string& source, Index min_features)
{
    std::vector<Eigen::Triplet<double, std::int64_t>> entries;
    std::vector<double> labels;
    long long max_index = 0;

    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = raw;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        std::istringstream tokens{std::string(line)};
        std::string tok;
        tokens >> tok;
        double label = 0.0;
        if (tok.find(':') != std::string::npos) fail_at(source, line_no, "missing label before '" + tok + "'");
        if (!parse_double(tok, label)) fail_at(source, line_no, "label '" + tok + "' is not a number");
        if (!std::isfinite(label)) fail_at(source, line_no, "label is not finite");

        const std::int64_t col = static_cast<std::int64_t>(labels.size());
        long long prev = 0;
        while (tokens >> tok) {
            const auto colon = tok.find(':');
            if (colon == std::string::npos) fail_at(source, line_no, "expected idx:val, got '" + tok + "'");
            const std::string_view idx_tok = std::string_view(tok).substr(0, colon);
            const std::string_view val_tok = std::string_view(tok).substr(colon + 1);
            long long idx = 0;
            double val = 0.0;
            if (!parse_index(idx_tok, idx)) fail_at(source, line_no, "index '" + std::string(idx_tok) + "' is not an integer");
            if (idx < 1) fail_at(source, line_no, "index " + std::to_string(idx) + " is not positive (indices are 1-based)");
            if (idx > std::numeric_limits<std::int32_t>::max())
                fail_at(source, line_no, "index " + std::to_string(idx) + " is too large");
            if (idx == prev) fail_at(source, line_no, "duplicate index " + std::to_string(idx));
            if (idx < prev) fail_at(source, line_no, "index " + std::to_string(idx) + " after " + std::to_string(prev) + " (indices must increase)");
            if (!parse_double(val_tok, val)) fail_at(source, line_no, "value '" + std::string(val_tok) + "' is not a number");
            if (!std::isfinite(val)) fail_at(source, line_no, "value for index " + std::to_string(idx) + " is not finite");
            prev = idx;
            max_index = std::max(max_index, idx);
            if (val != 0.0) entries.emplace_back(idx - 1, col, val);
        }
        labels.push_back(label);
    }
    if (in.bad()) throw InputError(source + ": read error");
    if (labels.empty()) fail_at(source, line_no, "no observations (empty file)");

    const Index n = std::max<Index>(static_cast<Index>(max_index), min_features);
    if (n == 0) fail_at(source, line_no, "no features");
    SparseMatrix X(n, static_cast<Index>(labels.size()));
    X.setFromTriplets(entries.begin(), entries.end());
    X.makeCompressed();

    Dataset d;
    d.X = DataMatrix(std::move(X));
    d.y = Eigen::Map<const Vector>(labels.data(), static_cast<Index>(labels.size()));
    return d;
}

Dataset load_libsvm(const std::filesystem::path& path, Index min_features)
{
    auto in = open_in(path);
    return read_libsvm(in, path.string(), min_features);
}

void write_libsvm(std::ostream& out, const Dataset& data)
{
    data.validate();
    const Index m = data.n_observations();
    const SparseMatrix Xt = [&] {
        if (const SparseMatrix* s = data.X.sparse_ptr()) return SparseMatrix(s->transpose());
        return SparseMatrix(data.X.dense().transpose().sparseView());
    }();
    out.precision(17);
    for (Index j = 0; j < m; ++j) {
        out << data.y(j);
        for (SparseMatrix::InnerIterator it(Xt, j); it; ++it)
            if (it.value() != 0.0) out << ' ' << it.col() + 1 << ':' << it.value();
        out << '\n';
    }
    if (!out) throw InputError("write_libsvm: write failed");
}

void save_libsvm(const std::filesystem::path& path, const Dataset& data)
{
    auto out = open_out(path);
    write_libsvm(out, data);
}

Dataset read_csv(std::istream& in, const std::string& source)
{
    std::string raw;
    std::size_t line_no = 0;
    std::vector<std::string> header;
    while (header.empty() && std::getline(in, raw)) {
        ++line_no;
        const std::string_view line = trim(raw);
        if (line.empty()) continue;
        for (auto f : split(line, ',')) header.emplace_back(trim(f));
    }
    if (header.empty()) fail_at(source, line_no, "missing header row (empty file)");
    if (header.size() < 2) fail_at(source, line_no, "need at least one feature column and a response column");

    const std::size_t n = header.size() - 1;
    std::vector<double> values;
    std::vector<double> labels;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string_view line = trim(raw);
        if (line.empty()) continue;
        const auto fields = split(line, ',');
        if (fields.size() != header.size()) {
            std::ostringstream os;
            os << "expected " << header.size() << " fields, got " << fields.size();
            fail_at(source, line_no, os.str());
        }
        for (std::size_t j = 0; j < fields.size(); ++j) {
            double v = 0.0;
            const std::string_view f = trim(fields[j]);
            if (!parse_double(f, v)) fail_at(source, line_no, "field " + std::to_string(j + 1) + " ('" + std::string(f) + "') is not a number");
            if (!std::isfinite(v)) fail_at(source, line_no, "field " + std::to_string(j + 1) + " is not finite");
            (j < n ? values : labels).push_back(v);
        }
    }
    if (labels.empty()) fail_at(source, line_no, "no observations");

    const Index m = static_cast<Index>(labels.size());
    Dataset d;
    // values holds observations row by row, i.e. X column by column.
    d.X = DataMatrix(Matrix(Eigen::Map<const Matrix>(values.data(), static_cast<Index>(n), m)));
    d.y = Eigen::Map<const Vector>(labels.data(), m);
    d.feature_names.assign(header.begin(), header.end() - 1);
    return d;
}

Dataset load_csv(const std::filesystem::path& path)
{
    auto in = open_in(path);
    return read_csv(in, path.string());
}

DataFormat parse_format(const std::string& name)
{
    if (name == "libsvm") return DataFormat::libsvm;
    if (name == "csv") return DataFormat::csv;
    throw InputError("unknown data format '" + name + "' (expected libsvm or csv)");
}

Dataset load_dataset(const std::filesystem::path& path, DataFormat format)
{
    return format == DataFormat::libsvm ? load_libsvm(path) : load_csv(path);
}

void write_sketch(std::ostream& out, const Sketch& sk)
{
    const Matrix P = sk.P();
    const Matrix Q = sk.Q();
    out.write("SQSK", 4);
    put(out, kSketchFileVersion);
    put(out, static_cast<std::uint64_t>(P.rows()));
    put(out, static_cast<std::uint64_t>(Q.rows()));
    put(out, static_cast<std::uint64_t>(P.cols()));
    for (const Matrix* M : {&P, &Q})
        for (Index i = 0; i < M->rows(); ++i)
            for (Index j = 0; j < M->cols(); ++j) put_f64(out, (*M)(i, j));
    put(out, static_cast<std::uint64_t>(sk.meta().power_iters));
    put(out, static_cast<std::uint64_t>(sk.meta().seed));
    put_f64(out, sk.meta().spectral_error);
    if (!out) throw InputError("write_sketch: write failed");
}

Sketch read_sketch(std::istream& in, const std::string& source)
{
    const auto bad = [&](const std::string& why) { return InputError(source + ": " + why); };

    char magic[4] = {};
    if (!in.read(magic, 4)) throw bad("truncated sketch file (no header)");
    if (std::memcmp(magic, "SQSK", 4) != 0) throw bad("not a sketch file (bad magic)");
    std::uint32_t version = 0;
    if (!get(in, version)) throw bad("truncated sketch file (no version)");
    if (version != kSketchFileVersion)
        throw bad("unsupported sketch file version " + std::to_string(version) + " (expected " +
                  std::to_string(kSketchFileVersion) + ")");

    std::uint64_t n = 0, m = 0, k = 0;
    if (!get(in, n) || !get(in, m) || !get(in, k)) throw bad("truncated sketch file (no dimensions)");
    constexpr std::uint64_t limit = std::uint64_t{1} << 40;
    if (n == 0 || m == 0 || k == 0 || n > limit || m > limit || k > limit || k > std::min(n, m) ||
        (n + m) > limit / k)
        throw bad("implausible sketch dimensions n=" + std::to_string(n) + " m=" + std::to_string(m) +
                  " k=" + std::to_string(k));

    Matrix P(static_cast<Index>(n), static_cast<Index>(k));
    Matrix Q(static_cast<Index>(m), static_cast<Index>(k));
    for (Matrix* M : {&P, &Q})
        for (Index i = 0; i < M->rows(); ++i)
            for (Index j = 0; j < M->cols(); ++j)
                if (!get_f64(in, (*M)(i, j))) throw bad("truncated sketch file (factor data)");
    SketchMeta meta;
    std::uint64_t iters = 0, seed = 0;
    if (!get(in, iters) || !get(in, seed) || !get_f64(in, meta.spectral_error))
        throw bad("truncated sketch file (metadata)");
    meta.power_iters = iters;
    meta.seed = seed;
    if (in.peek() != std::char_traits<char>::eof()) throw bad("trailing bytes after sketch data");
    return Sketch(std::move(P), std::move(Q), meta);
}

void save_sketch(const Sketch& sk, const std::filesystem::path& path)
{
    auto out = open_out(path, std::ios::out | std::ios::binary | std::ios::trunc);
    write_sketch(out, sk);
}

Sketch load_sketch(const std::filesystem::path& path)
{
    auto in = open_in(path, std::ios::in | std::ios::binary);
    return read_sketch(in, path.string());
}

} // namespace sqsk
