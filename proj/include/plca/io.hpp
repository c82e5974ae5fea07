#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "json.hpp"

#include "plca/corpus.hpp"
#include "plca/em.hpp"
#include "plca/error.hpp"
#include "plca/matrix.hpp"
#include "plca/model.hpp"

// File formats. All writers emit UTF-8 with LF line endings and '.' decimal
// separators; doubles are printed with 17 significant digits so a reader
// recovers them bit-for-bit.
namespace plca::io {

namespace detail {

inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline double parse_double(std::string_view text, const std::string& where) {
    // leading/trailing blanks and a stray CR are tolerated
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) {
        text.remove_prefix(1);
    }
    while (!text.empty() &&
           (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) {
        text.remove_suffix(1);
    }
    double value = 0.0;
    const auto* begin = text.data();
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end || text.empty()) {
        throw ParseError(where + ": cannot parse '" + std::string(text) + "' as a number");
    }
    return value;
}

inline std::uint64_t parse_u64(std::string_view text, const std::string& where) {
    std::uint64_t value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
        throw ParseError(where + ": cannot parse '" + std::string(text) +
                         "' as an unsigned integer");
    }
    return value;
}

inline std::ofstream open_for_write(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open '" + path.string() + "' for writing");
    }
    return out;
}

inline std::ifstream open_for_read(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open '" + path.string() + "' for reading");
    }
    return in;
}

inline void finish_write(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) {
        throw IoError("write to '" + path.string() + "' failed");
    }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Matrices: headerless CSV, rows are events, columns are groups.
// ---------------------------------------------------------------------------

inline void write_matrix(const Matrix& m, const std::filesystem::path& path) {
    auto out = detail::open_for_write(path);
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < m.cols(); ++c) {
            if (c > 0) {
                out << ',';
            }
            out << detail::format_double(m(r, c));
        }
        out << '\n';
    }
    detail::finish_write(out, path);
}

// Parses a CSV of numbers; rejects ragged rows, negative and non-finite
// entries (naming the 1-based row/column), and empty files.
inline Matrix read_matrix(const std::filesystem::path& path) {
    auto in = detail::open_for_read(path);
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            // allow trailing blank lines only
            std::string rest;
            while (std::getline(in, rest)) {
                if (!rest.empty() && rest.back() == '\r') {
                    rest.pop_back();
                }
                if (!rest.empty()) {
                    throw ParseError(path.string() + ": blank line " +
                                     std::to_string(line_no) + " inside the table");
                }
            }
            break;
        }
        std::vector<double> row;
        std::size_t start = 0;
        std::size_t field_no = 0;
        while (start <= line.size()) {
            std::size_t comma = line.find(',', start);
            if (comma == std::string::npos) {
                comma = line.size();
            }
            ++field_no;
            const std::string where = path.string() + ": line " + std::to_string(line_no) +
                                      ", field " + std::to_string(field_no);
            row.push_back(
                detail::parse_double(std::string_view(line).substr(start, comma - start),
                                     where));
            start = comma + 1;
        }
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw ParseError(path.string() + ": line " + std::to_string(line_no) + " has " +
                             std::to_string(row.size()) + " fields, expected " +
                             std::to_string(rows.front().size()));
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) {
        throw ParseError(path.string() + ": empty file");
    }
    Matrix m(rows.size(), rows.front().size());
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < m.cols(); ++c) {
            const double v = rows[r][c];
            if (!std::isfinite(v)) {
                throw ValidationError(path.string() + ": non-finite value at row " +
                                      std::to_string(r + 1) + ", column " +
                                      std::to_string(c + 1));
            }
            if (v < 0.0) {
                throw ValidationError(path.string() + ": negative value " +
                                      detail::format_double(v) + " at row " +
                                      std::to_string(r + 1) + ", column " +
                                      std::to_string(c + 1));
            }
            m(r, c) = v;
        }
    }
    return m;
}

// ---------------------------------------------------------------------------
// Models: one JSON document, format_version 1.
//   dims {M,N,K}, group_prior (N numbers), mixture (K rows of N, row-major by
//   z), components (M rows of K, row-major by e).
// ---------------------------------------------------------------------------

inline void write_model(const PlcaModel& model, const std::filesystem::path& path) {
    auto out = detail::open_for_write(path);
    const auto row = [&](auto get, std::size_t count) {
        std::string s = "[";
        for (std::size_t i = 0; i < count; ++i) {
            if (i > 0) {
                s += ", ";
            }
            s += detail::format_double(get(i));
        }
        s += "]";
        return s;
    };

    out << "{\n";
    out << "  \"format_version\": 1,\n";
    out << "  \"dims\": {\"M\": " << model.events() << ", \"N\": " << model.groups()
        << ", \"K\": " << model.classes() << "},\n";
    out << "  \"group_prior\": "
        << row([&](std::size_t g) { return model.group_prior()[g]; }, model.groups())
        << ",\n";
    out << "  \"mixture\": [\n";
    for (std::size_t z = 0; z < model.classes(); ++z) {
        out << "    " << row([&](std::size_t g) { return model.mixture()(z, g); },
                             model.groups())
            << (z + 1 < model.classes() ? ",\n" : "\n");
    }
    out << "  ],\n";
    out << "  \"components\": [\n";
    for (std::size_t e = 0; e < model.events(); ++e) {
        out << "    " << row([&](std::size_t z) { return model.components()(e, z); },
                             model.classes())
            << (e + 1 < model.events() ? ",\n" : "\n");
    }
    out << "  ]\n";
    out << "}\n";
    detail::finish_write(out, path);
}

inline PlcaModel read_model(const std::filesystem::path& path) {
    auto in = detail::open_for_read(path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& err) {
        throw ParseError(path.string() + ": " + err.what());
    }

    const auto require = [&](const nlohmann::json& j, const char* field) -> const nlohmann::json& {
        if (!j.contains(field)) {
            throw SchemaError(path.string() + ": missing field '" + field + "'");
        }
        return j.at(field);
    };

    const auto& version = require(doc, "format_version");
    if (!version.is_number_integer()) {
        throw SchemaError(path.string() + ": field 'format_version' must be an integer");
    }
    if (version.get<std::int64_t>() != 1) {
        throw VersionError(path.string() + ": unsupported format_version " +
                           version.dump() + ", expected 1");
    }

    const auto& dims = require(doc, "dims");
    const auto dim = [&](const char* field) -> std::size_t {
        if (!dims.contains(field) || !dims.at(field).is_number_integer() ||
            dims.at(field).get<std::int64_t>() < 1) {
            throw SchemaError(path.string() + ": field 'dims." + field +
                              "' must be a positive integer");
        }
        return dims.at(field).get<std::size_t>();
    };
    const std::size_t m = dim("M");
    const std::size_t n = dim("N");
    const std::size_t k = dim("K");

    const auto numbers = [&](const nlohmann::json& j, std::size_t count,
                             const std::string& field) {
        if (!j.is_array() || j.size() != count) {
            throw SchemaError(path.string() + ": field '" + field + "' must be an array of " +
                              std::to_string(count) + " numbers");
        }
        std::vector<double> out;
        out.reserve(count);
        for (const auto& v : j) {
            if (!v.is_number()) {
                throw SchemaError(path.string() + ": field '" + field +
                                  "' must contain only numbers");
            }
            out.push_back(v.get<double>());
        }
        return out;
    };

    std::vector<double> prior = numbers(require(doc, "group_prior"), n, "group_prior");

    const auto matrix_rows = [&](const nlohmann::json& j, std::size_t rows, std::size_t cols,
                                 const std::string& field) {
        if (!j.is_array() || j.size() != rows) {
            throw SchemaError(path.string() + ": field '" + field + "' must be an array of " +
                              std::to_string(rows) + " rows");
        }
        Matrix out(rows, cols);
        for (std::size_t r = 0; r < rows; ++r) {
            const std::vector<double> row =
                numbers(j.at(r), cols, field + "[" + std::to_string(r) + "]");
            for (std::size_t c = 0; c < cols; ++c) {
                out(r, c) = row[c];
            }
        }
        return out;
    };

    Matrix mixture = matrix_rows(require(doc, "mixture"), k, n, "mixture");
    Matrix components = matrix_rows(require(doc, "components"), m, k, "components");
    return PlcaModel(std::move(prior), std::move(mixture), std::move(components));
}

// ---------------------------------------------------------------------------
// Corpora: "# plca-corpus v1 M=<M> N=<N> seed=<seed>" then one "e g" pair per
// line.
// ---------------------------------------------------------------------------

struct CorpusFile {
    SampleCorpus corpus;
    std::size_t events = 0;
    std::size_t groups = 0;
};

inline void write_corpus(const SampleCorpus& corpus, std::size_t events, std::size_t groups,
                         const std::filesystem::path& path) {
    auto out = detail::open_for_write(path);
    out << "# plca-corpus v1 M=" << events << " N=" << groups << " seed=" << corpus.seed
        << '\n';
    for (const CorpusPair& pair : corpus.pairs) {
        out << pair.event << ' ' << pair.group << '\n';
    }
    detail::finish_write(out, path);
}

inline CorpusFile read_corpus(const std::filesystem::path& path) {
    auto in = detail::open_for_read(path);
    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError(path.string() + ": empty file");
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }

    std::istringstream header(line);
    std::string hash, tag, version, m_field, n_field, seed_field;
    header >> hash >> tag >> version >> m_field >> n_field >> seed_field;
    if (hash != "#" || tag != "plca-corpus") {
        throw ParseError(path.string() + ": missing '# plca-corpus' header");
    }
    if (version != "v1") {
        throw VersionError(path.string() + ": unsupported corpus version '" + version +
                           "', expected v1");
    }
    const auto field_value = [&](const std::string& field, const char* name) {
        const std::string prefix = std::string(name) + "=";
        if (field.rfind(prefix, 0) != 0) {
            throw ParseError(path.string() + ": header field '" + field + "', expected " +
                             prefix + "<value>");
        }
        return field.substr(prefix.size());
    };

    CorpusFile result;
    result.events = static_cast<std::size_t>(
        detail::parse_u64(field_value(m_field, "M"), path.string() + ": header M"));
    result.groups = static_cast<std::size_t>(
        detail::parse_u64(field_value(n_field, "N"), path.string() + ": header N"));
    result.corpus.seed =
        detail::parse_u64(field_value(seed_field, "seed"), path.string() + ": header seed");
    if (result.events == 0 || result.groups == 0) {
        throw ParseError(path.string() + ": header dimensions must be positive");
    }

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        std::istringstream fields(line);
        std::string e_text, g_text, extra;
        fields >> e_text >> g_text;
        if (g_text.empty() || (fields >> extra)) {
            throw ParseError(path.string() + ": line " + std::to_string(line_no) +
                             ": expected 'event group'");
        }
        const std::string where = path.string() + ": line " + std::to_string(line_no);
        CorpusPair pair;
        pair.event = static_cast<std::size_t>(detail::parse_u64(e_text, where));
        pair.group = static_cast<std::size_t>(detail::parse_u64(g_text, where));
        if (pair.event >= result.events || pair.group >= result.groups) {
            throw ValidationError(where + ": pair (" + std::to_string(pair.event) + ", " +
                                  std::to_string(pair.group) + ") outside " +
                                  std::to_string(result.events) + "x" +
                                  std::to_string(result.groups));
        }
        result.corpus.pairs.push_back(pair);
    }
    return result;
}

// ---------------------------------------------------------------------------
// Traces: CSV with a fixed header, one row per iteration, and the termination
// reason as a trailing comment line.
// ---------------------------------------------------------------------------

inline void write_trace(const FitTrace& trace, const std::filesystem::path& path) {
    if (trace.records.empty()) {
        throw ValidationError("write_trace: trace has no iterations");
    }
    auto out = detail::open_for_write(path);
    out << "iter,fobj,kld,max_param_delta,wall_ms\n";
    for (const IterationRecord& rec : trace.records) {
        out << rec.iter << ',' << detail::format_double(rec.fobj) << ','
            << detail::format_double(rec.kld) << ','
            << detail::format_double(rec.max_param_delta) << ','
            << detail::format_double(rec.wall_ms) << '\n';
    }
    out << "# terminated: " << to_string(trace.termination) << '\n';
    detail::finish_write(out, path);
}

inline FitTrace read_trace(const std::filesystem::path& path) {
    auto in = detail::open_for_read(path);
    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError(path.string() + ": empty file");
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    if (line != "iter,fobj,kld,max_param_delta,wall_ms") {
        throw ParseError(path.string() + ": unexpected header '" + line + "'");
    }

    FitTrace trace;
    bool saw_termination = false;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        const std::string where = path.string() + ": line " + std::to_string(line_no);
        if (line.rfind("# terminated: ", 0) == 0) {
            const std::string reason = line.substr(std::string("# terminated: ").size());
            if (reason == "converged") {
                trace.termination = Termination::converged;
            } else if (reason == "max-iters") {
                trace.termination = Termination::max_iters;
            } else if (reason == "degenerate") {
                trace.termination = Termination::degenerate;
            } else {
                throw ParseError(where + ": unknown termination reason '" + reason + "'");
            }
            saw_termination = true;
            continue;
        }
        std::vector<std::string_view> fields;
        std::string_view view(line);
        std::size_t start = 0;
        while (start <= view.size()) {
            std::size_t comma = view.find(',', start);
            if (comma == std::string_view::npos) {
                comma = view.size();
            }
            fields.push_back(view.substr(start, comma - start));
            start = comma + 1;
        }
        if (fields.size() != 5) {
            throw ParseError(where + ": expected 5 fields, found " +
                             std::to_string(fields.size()));
        }
        IterationRecord rec;
        rec.iter = static_cast<std::size_t>(detail::parse_u64(fields[0], where));
        rec.fobj = detail::parse_double(fields[1], where);
        rec.kld = detail::parse_double(fields[2], where);
        rec.max_param_delta = detail::parse_double(fields[3], where);
        rec.wall_ms = detail::parse_double(fields[4], where);
        trace.records.push_back(rec);
    }
    if (trace.records.empty()) {
        throw ParseError(path.string() + ": trace has no iteration rows");
    }
    if (!saw_termination) {
        throw ParseError(path.string() + ": missing '# terminated:' line");
    }
    return trace;
}

}  // namespace plca::io
