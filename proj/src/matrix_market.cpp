#include "manpqn/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include "manpqn/errors.hpp"

namespace manpqn {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

bool blank(const std::string& line) {
    return std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); });
}

enum class Layout { coordinate, array };

struct Header {
    Layout layout;
    bool symmetric;
};

Header parse_banner(const std::string& line, long lineno) {
    std::istringstream ss(line);
    std::string banner, object, format, field, symmetry;
    ss >> banner >> object >> format >> field >> symmetry;
    if (banner != "%%MatrixMarket") throw ParseError("missing %%MatrixMarket banner", lineno);
    if (lower(object) != "matrix") throw ParseError("unsupported object '" + object + "'", lineno);

    Header h{};
    const std::string fmt = lower(format);
    if (fmt == "coordinate") {
        h.layout = Layout::coordinate;
    } else if (fmt == "array") {
        h.layout = Layout::array;
    } else {
        throw ParseError("unsupported format '" + format + "'", lineno);
    }
    const std::string fld = lower(field);
    if (fld != "real" && fld != "integer" && fld != "double") {
        throw ParseError("unsupported field '" + field + "' (real matrices only)", lineno);
    }
    const std::string sym = lower(symmetry);
    if (sym == "general") {
        h.symmetric = false;
    } else if (sym == "symmetric") {
        h.symmetric = true;
    } else {
        throw ParseError("unsupported symmetry '" + symmetry + "'", lineno);
    }
    return h;
}

double parse_value(std::istringstream& ss, long lineno) {
    std::string token;
    if (!(ss >> token)) throw ParseError("missing value", lineno);
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(token, &used);
    } catch (const std::exception&) {
        throw ParseError("malformed value '" + token + "'", lineno);
    }
    if (used != token.size() || !std::isfinite(v)) throw ParseError("malformed value '" + token + "'", lineno);
    return v;
}

}  // namespace

Eigen::SparseMatrix<double> SparseMatrix::to_eigen() const {
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(entries.size());
    for (const Entry& e : entries) {
        trips.emplace_back(static_cast<Eigen::Index>(e.row), static_cast<Eigen::Index>(e.col), e.value);
    }
    Eigen::SparseMatrix<double> out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    out.setFromTriplets(trips.begin(), trips.end());
    return out;
}

SparseMatrix read_matrix_market(std::istream& in) {
    std::string line;
    long lineno = 0;
    if (!std::getline(in, line)) throw ParseError("empty input", 1);
    ++lineno;
    const Header header = parse_banner(line, lineno);

    // Comments and blank lines until the size line.
    bool have_size = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '%' || blank(line)) continue;
        have_size = true;
        break;
    }
    if (!have_size) throw ParseError("missing size line", lineno + 1);

    SparseMatrix m;
    std::int64_t declared = 0;
    {
        std::istringstream ss(line);
        if (header.layout == Layout::coordinate) {
            if (!(ss >> m.rows >> m.cols >> declared)) throw ParseError("malformed size line", lineno);
        } else {
            if (!(ss >> m.rows >> m.cols)) throw ParseError("malformed size line", lineno);
            declared = header.symmetric ? m.rows * (m.rows + 1) / 2 : m.rows * m.cols;
        }
        std::string extra;
        if (ss >> extra) throw ParseError("trailing data on size line", lineno);
        if (m.rows < 1 || m.cols < 1 || declared < 0) throw ParseError("invalid dimensions", lineno);
        if (header.symmetric && m.rows != m.cols) throw ParseError("symmetric matrix must be square", lineno);
    }

    m.entries.reserve(static_cast<std::size_t>(declared) * (header.symmetric ? 2 : 1));
    std::int64_t seen = 0;
    // Array layout walks column-major; symmetric arrays store the lower triangle.
    std::int64_t arr_row = 0, arr_col = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '%' || blank(line)) continue;
        if (seen == declared) throw ParseError("more entries than declared (" + std::to_string(declared) + ")", lineno);
        std::istringstream ss(line);
        std::int64_t i = 0, j = 0;
        if (header.layout == Layout::coordinate) {
            if (!(ss >> i >> j)) throw ParseError("malformed entry", lineno);
            if (i < 1 || i > m.rows || j < 1 || j > m.cols) {
                throw ParseError("index (" + std::to_string(i) + ", " + std::to_string(j) + ") out of range", lineno);
            }
            --i;
            --j;
        } else {
            i = arr_row;
            j = arr_col;
            if (++arr_row == m.rows) {
                ++arr_col;
                arr_row = header.symmetric ? arr_col : 0;
            }
        }
        const double v = parse_value(ss, lineno);
        std::string extra;
        if (ss >> extra) throw ParseError("trailing data in entry", lineno);
        if (header.symmetric && header.layout == Layout::coordinate && j > i) {
            throw ParseError("symmetric file stores an upper-triangle entry", lineno);
        }
        m.entries.push_back({i, j, v});
        if (header.symmetric && i != j) m.entries.push_back({j, i, v});
        ++seen;
    }
    if (seen != declared) {
        throw ParseError("declared " + std::to_string(declared) + " entries but found " + std::to_string(seen),
                         lineno + 1);
    }
    return m;
}

SparseMatrix load_matrix_market(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open Matrix Market file " + path.string());
    return read_matrix_market(in);
}

void write_matrix_market(std::ostream& out, const SparseMatrix& m) {
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << m.rows << ' ' << m.cols << ' ' << m.entries.size() << '\n';
    out << std::setprecision(17);
    for (const auto& e : m.entries) out << e.row + 1 << ' ' << e.col + 1 << ' ' << e.value << '\n';
}

}  // namespace manpqn
