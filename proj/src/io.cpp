#include "lmvsc/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include "lmvsc/errors.hpp"

namespace lmvsc::io {
namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

double parse_number(std::string_view cell, const std::filesystem::path& path,
                    std::size_t line) {
    cell = trim(cell);
    if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
    double value = 0.0;
    const auto* end = cell.data() + cell.size();
    const auto [ptr, ec] = std::from_chars(cell.data(), end, value);
    if (cell.empty() || ec != std::errc{} || ptr != end)
        throw ParseError(path.string() + ":" + std::to_string(line) +
                         ": non-numeric value '" + std::string(cell) + "'");
    return value;
}

} // namespace

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        out.flush();
        if (!out) throw IoError("failed writing '" + tmp.string() + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw IoError("cannot rename onto '" + path.string() + "'");
    }
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Eigen::MatrixXd read_csv(const std::filesystem::path& path, bool has_header) {
    const std::string text = read_file(path);
    std::vector<double> values;
    std::size_t cols = 0;
    std::size_t rows = 0;
    std::size_t line_no = 0;
    bool header_pending = has_header;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        const auto body = trim(line);
        if (body.empty()) continue;
        if (header_pending) {
            header_pending = false;
            continue;
        }
        std::size_t fields = 0;
        std::size_t start = 0;
        while (true) {
            const auto comma = body.find(',', start);
            const auto cell = body.substr(start, comma == std::string_view::npos
                                                     ? std::string_view::npos
                                                     : comma - start);
            values.push_back(parse_number(cell, path, line_no));
            ++fields;
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        if (rows == 0) {
            cols = fields;
        } else if (fields != cols) {
            throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                             std::to_string(cols) + " fields, found " +
                             std::to_string(fields));
        }
        ++rows;
    }
    if (rows == 0) throw ParseError(path.string() + ": no data rows");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c)
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = values[r * cols + c];
    return m;
}

std::string format_double(double x) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, ptr);
}

std::string format_csv(const Eigen::MatrixXd& m) { return format_csv(m, {}); }

std::string format_csv(const Eigen::MatrixXd& m, const std::vector<std::string>& header) {
    std::string out;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) out += ',';
        out += header[i];
    }
    if (!header.empty()) out += '\n';
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            if (c) out += ',';
            out += format_double(m(r, c));
        }
        out += '\n';
    }
    return out;
}

Eigen::MatrixXd read_matrix_market(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line.rfind("%%MatrixMarket", 0) != 0)
        throw ParseError(path.string() + ": missing %%MatrixMarket banner");

    std::istringstream banner(line);
    std::string tag, object, format, field, symmetry;
    banner >> tag >> object >> format >> field >> symmetry;
    if (object != "matrix") throw ParseError(path.string() + ": unsupported object " + object);
    if (format != "array" && format != "coordinate")
        throw ParseError(path.string() + ": unsupported format " + format);
    if (field != "real" && field != "integer" && field != "double" && field != "pattern")
        throw ParseError(path.string() + ": unsupported field " + field);
    if (symmetry != "general")
        throw ParseError(path.string() + ": only general symmetry is supported");
    const bool pattern = field == "pattern";

    std::size_t line_no = 1;
    auto next_data_line = [&](std::string& out) {
        while (std::getline(in, out)) {
            ++line_no;
            const auto body = trim(out);
            if (body.empty() || body.front() == '%') continue;
            out = std::string(body);
            return true;
        }
        return false;
    };
    auto tokens = [&](const std::string& s) {
        std::vector<std::string_view> result;
        std::string_view view(s);
        std::size_t pos = 0;
        while (pos < view.size()) {
            const auto b = view.find_first_not_of(" \t", pos);
            if (b == std::string_view::npos) break;
            const auto e = view.find_first_of(" \t", b);
            result.push_back(view.substr(b, e == std::string_view::npos ? e : e - b));
            pos = e == std::string_view::npos ? view.size() : e;
        }
        return result;
    };
    auto as_index = [&](std::string_view t) {
        const double d = parse_number(t, path, line_no);
        if (d < 0 || d != std::floor(d)) throw ParseError(path.string() + ": bad index");
        return static_cast<Eigen::Index>(d);
    };

    std::string data;
    if (!next_data_line(data)) throw ParseError(path.string() + ": missing size line");
    const auto size = tokens(data);
    if (format == "array") {
        if (size.size() != 2) throw ParseError(path.string() + ": bad size line");
        const auto rows = as_index(size[0]);
        const auto cols = as_index(size[1]);
        Eigen::MatrixXd m(rows, cols);
        // Column-major entry order.
        for (Eigen::Index c = 0; c < cols; ++c) {
            for (Eigen::Index r = 0; r < rows; ++r) {
                if (!next_data_line(data))
                    throw ParseError(path.string() + ": too few entries");
                const auto t = tokens(data);
                if (t.size() != 1) throw ParseError(path.string() + ": expected one value per line");
                m(r, c) = parse_number(t[0], path, line_no);
            }
        }
        if (rows == 0 || cols == 0) throw ParseError(path.string() + ": empty matrix");
        return m;
    }
    if (size.size() != 3) throw ParseError(path.string() + ": bad size line");
    const auto rows = as_index(size[0]);
    const auto cols = as_index(size[1]);
    const auto nnz = as_index(size[2]);
    if (rows == 0 || cols == 0) throw ParseError(path.string() + ": empty matrix");
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(rows, cols);
    for (Eigen::Index e = 0; e < nnz; ++e) {
        if (!next_data_line(data)) throw ParseError(path.string() + ": too few entries");
        const auto t = tokens(data);
        if (t.size() != (pattern ? 2u : 3u))
            throw ParseError(path.string() + ":" + std::to_string(line_no) + ": bad entry");
        const auto r = as_index(t[0]);
        const auto c = as_index(t[1]);
        if (r < 1 || r > rows || c < 1 || c > cols)
            throw ParseError(path.string() + ":" + std::to_string(line_no) + ": index out of range");
        m(r - 1, c - 1) = pattern ? 1.0 : parse_number(t[2], path, line_no);
    }
    return m;
}

std::string format_matrix_market_array(const Eigen::MatrixXd& m) {
    std::string out = "%%MatrixMarket matrix array real general\n";
    out += std::to_string(m.rows()) + " " + std::to_string(m.cols()) + "\n";
    for (Eigen::Index c = 0; c < m.cols(); ++c)
        for (Eigen::Index r = 0; r < m.rows(); ++r) out += format_double(m(r, c)) + "\n";
    return out;
}

std::string format_matrix_market_coordinate(const Eigen::MatrixXd& m) {
    std::string body;
    Eigen::Index nnz = 0;
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            if (m(r, c) == 0.0) continue;
            ++nnz;
            body += std::to_string(r + 1) + " " + std::to_string(c + 1) + " " +
                    format_double(m(r, c)) + "\n";
        }
    }
    return "%%MatrixMarket matrix coordinate real general\n" + std::to_string(m.rows()) + " " +
           std::to_string(m.cols()) + " " + std::to_string(nnz) + "\n" + body;
}

} // namespace lmvsc::io
