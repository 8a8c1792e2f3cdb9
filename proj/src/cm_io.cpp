#include "cmu/cm_io.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <optional>
#include <cmath>
#include <sstream>
#include <vector>

#include "cmu/error.hpp"

namespace cmu {

namespace {

using nlohmann::json;

[[noreturn]] void fail(std::string_view what) { throw Error(ErrorCode::ParseError, std::string(what)); }

[[noreturn]] void fail_at(std::size_t line, std::size_t field, std::string_view what) {
    std::ostringstream msg;
    msg << "line " << line << ", field " << field << ": " << what;
    throw Error(ErrorCode::ParseError, msg.str());
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::string lower(std::string_view s) {
    std::string out(trim(s));
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == ',' || line[i] == '\t') {
            out.push_back(trim(line.substr(start, i - start)));
            start = i + 1;
        }
    }
    return out;
}

Count parse_count(std::string_view text, std::size_t line, std::size_t field) {
    Count value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
        fail_at(line, field, "expected an integer count, got '" + std::string(text) + "'");
    }
    if (value < 0) {
        std::ostringstream msg;
        msg << "line " << line << ", field " << field << ": count " << value << " is negative";
        throw Error(ErrorCode::NegativeCount, msg.str());
    }
    return value;
}

Count json_count(const json& v, std::string_view where) {
    if (v.is_number_integer()) {
        const auto value = v.get<Count>();
        if (value < 0) throw Error(ErrorCode::NegativeCount, std::string(where) + " is negative");
        return value;
    }
    if (v.is_number_float()) {
        const double d = v.get<double>();
        if (d == std::floor(d)) {
            if (d < 0) throw Error(ErrorCode::NegativeCount, std::string(where) + " is negative");
            return static_cast<Count>(d);
        }
    }
    fail(std::string(where) + " must be an integer count");
}

struct Row {
    std::size_t line;
    std::vector<std::string_view> fields;
};

ConfusionMatrix parse_delimited(std::string_view text) {
    std::vector<Row> rows;
    std::size_t line_no = 0;
    // ';' separates rows in the inline table form.
    std::string normalized(text);
    for (auto& c : normalized) {
        if (c == ';') c = '\n';
    }
    std::string_view rest = normalized;
    while (!rest.empty()) {
        const auto nl = rest.find('\n');
        const std::string_view line = trim(rest.substr(0, nl));
        rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
        ++line_no;
        if (line.empty() || line.front() == '#') continue;
        rows.push_back({line_no, split_fields(line)});
    }
    if (rows.empty()) fail("confusion matrix input is empty");

    // Named record: header row followed by one data row.
    const bool header = std::any_of(rows[0].fields.begin(), rows[0].fields.end(), [](std::string_view f) {
        return !f.empty() && std::isalpha(static_cast<unsigned char>(f.front()));
    });
    if (header) {
        if (rows.size() != 2) fail("named CSV record needs exactly one header row and one data row");
        const auto& names = rows[0].fields;
        const auto& values = rows[1].fields;
        if (values.size() != names.size()) fail_at(rows[1].line, values.size(), "field count does not match header");
        std::array<std::optional<Count>, 4> slots;  // tp, fn, fp, tn
        constexpr std::array<std::string_view, 4> keys = {"tp", "fn", "fp", "tn"};
        for (std::size_t i = 0; i < names.size(); ++i) {
            const std::string key = lower(names[i]);
            const auto it = std::find(keys.begin(), keys.end(), key);
            if (it == keys.end()) fail_at(rows[0].line, i + 1, "unknown column '" + std::string(names[i]) + "'");
            slots[static_cast<std::size_t>(it - keys.begin())] = parse_count(values[i], rows[1].line, i + 1);
        }
        for (std::size_t k = 0; k < 4; ++k) {
            if (!slots[k]) fail("missing field '" + std::string(keys[k]) + "'");
        }
        return ConfusionMatrix::validate(*slots[0], *slots[1], *slots[2], *slots[3]);
    }

    if (rows.size() == 1) {
        const auto& r = rows[0];
        if (r.fields.size() != 4) fail_at(r.line, r.fields.size(), "a record needs 4 fields (tp, fn, fp, tn)");
        return ConfusionMatrix::validate(parse_count(r.fields[0], r.line, 1), parse_count(r.fields[1], r.line, 2),
                                         parse_count(r.fields[2], r.line, 3), parse_count(r.fields[3], r.line, 4));
    }
    if (rows.size() == 2) {
        for (const auto& r : rows) {
            if (r.fields.size() != 2) fail_at(r.line, r.fields.size(), "a 2x2 table row needs 2 fields");
        }
        return ConfusionMatrix::validate(parse_count(rows[0].fields[0], rows[0].line, 1),
                                         parse_count(rows[0].fields[1], rows[0].line, 2),
                                         parse_count(rows[1].fields[0], rows[1].line, 1),
                                         parse_count(rows[1].fields[1], rows[1].line, 2));
    }
    fail_at(rows[2].line, 1, "unexpected extra row");
}

}  // namespace

ConfusionMatrix cm_from_json(const json& value) {
    if (value.is_object()) {
        std::array<Count, 4> c{};
        constexpr std::array<const char*, 4> keys = {"tp", "fn", "fp", "tn"};
        for (std::size_t k = 0; k < 4; ++k) {
            const auto it = value.find(keys[k]);
            if (it == value.end()) fail(std::string("missing field '") + keys[k] + "'");
            c[k] = json_count(*it, keys[k]);
        }
        return ConfusionMatrix::validate(c[0], c[1], c[2], c[3]);
    }
    if (value.is_array() && value.size() == 2 && value[0].is_array() && value[1].is_array() &&
        value[0].size() == 2 && value[1].size() == 2) {
        return ConfusionMatrix::validate(json_count(value[0][0], "row 1, column 1"),
                                         json_count(value[0][1], "row 1, column 2"),
                                         json_count(value[1][0], "row 2, column 1"),
                                         json_count(value[1][1], "row 2, column 2"));
    }
    if (value.is_array() && value.size() == 4) {
        return ConfusionMatrix::validate(json_count(value[0], "tp"), json_count(value[1], "fn"),
                                         json_count(value[2], "fp"), json_count(value[3], "tn"));
    }
    fail("confusion matrix must be {tp, fn, fp, tn}, [tp, fn, fp, tn] or [[tp, fn], [fp, tn]]");
}

json cm_to_json(const ConfusionMatrix& cm) {
    return {{"tp", cm.tp()}, {"fn", cm.fn()}, {"fp", cm.fp()}, {"tn", cm.tn()}, {"n", cm.n()}};
}

ConfusionMatrix parse_cm_text(std::string_view text) {
    const std::string_view body = trim(text);
    if (!body.empty() && (body.front() == '{' || body.front() == '[')) {
        json value;
        try {
            value = json::parse(body);
        } catch (const json::parse_error& e) {
            fail(std::string("invalid JSON: ") + e.what());
        }
        return cm_from_json(value);
    }
    return parse_delimited(body);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::ParseError, "cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

ConfusionMatrix parse_cm(const std::string& source) {
    std::error_code ec;
    if (std::filesystem::is_regular_file(source, ec)) return parse_cm_text(read_file(source));
    const std::filesystem::path p(source);
    if (p.has_extension() || source.find('/') != std::string::npos) {
        throw Error(ErrorCode::ParseError, "cannot open '" + source + "'");
    }
    return parse_cm_text(source);
}

}  // namespace cmu
