#include "hybridnet/report.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>
#include <json.hpp>

namespace hybridnet::report {

namespace {

std::string csv_field(const Cell& cell) {
    struct Visitor {
        std::string operator()(Undefined) const { return std::string(kUndefined); }
        std::string operator()(double v) const { return fmt::format("{}", v); }
        std::string operator()(std::int64_t v) const { return fmt::format("{}", v); }
        std::string operator()(bool v) const { return v ? "true" : "false"; }
        std::string operator()(const std::string& v) const {
            if (v.find_first_of(",\"\n\r") == std::string::npos) return v;
            std::string quoted = "\"";
            for (const char c : v) {
                if (c == '"') quoted += '"';
                quoted += c;
            }
            quoted += '"';
            return quoted;
        }
    };
    return std::visit(Visitor{}, cell);
}

nlohmann::ordered_json to_json(const Cell& cell) {
    struct Visitor {
        nlohmann::ordered_json operator()(Undefined) const { return nullptr; }
        nlohmann::ordered_json operator()(double v) const { return v; }
        nlohmann::ordered_json operator()(std::int64_t v) const { return v; }
        nlohmann::ordered_json operator()(bool v) const { return v; }
        nlohmann::ordered_json operator()(const std::string& v) const { return v; }
    };
    return std::visit(Visitor{}, cell);
}

}  // namespace

void OutputRecord::add_row(std::vector<Cell> row) {
    if (row.size() != columns.size()) {
        throw std::logic_error(fmt::format("row has {} cells, expected {}", row.size(),
                                           columns.size()));
    }
    for (auto& cell : row) {
        if (const auto* v = std::get_if<double>(&cell); v && !std::isfinite(*v)) cell = Undefined{};
    }
    rows.push_back(std::move(row));
}

Format parse_format(std::string_view text) {
    if (text == "csv") return Format::Csv;
    if (text == "json") return Format::Json;
    throw std::invalid_argument(fmt::format("unknown output format '{}' (expected csv or json)", text));
}

void write_csv(std::ostream& out, const OutputRecord& record) {
    for (std::size_t i = 0; i < record.columns.size(); ++i) {
        out << (i ? "," : "") << csv_field(record.columns[i]);
    }
    out << '\n';
    for (const auto& row : record.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_field(row[i]);
        out << '\n';
    }
}

void write_json(std::ostream& out, const OutputRecord& record) {
    nlohmann::ordered_json doc;
    doc["schema_version"] = record.schema_version;
    doc["command"] = record.command;
    auto& meta = doc["metadata"] = nlohmann::ordered_json::object();
    for (const auto& [key, value] : record.metadata) meta[key] = to_json(value);
    doc["columns"] = record.columns;
    auto& rows = doc["rows"] = nlohmann::ordered_json::array();
    for (const auto& row : record.rows) {
        nlohmann::ordered_json obj = nlohmann::ordered_json::object();
        for (std::size_t i = 0; i < row.size(); ++i) obj[record.columns[i]] = to_json(row[i]);
        rows.push_back(std::move(obj));
    }
    out << doc.dump(2) << '\n';
}

void write(std::ostream& out, const OutputRecord& record, Format format) {
    if (format == Format::Json) {
        write_json(out, record);
    } else {
        write_csv(out, record);
    }
}

}  // namespace hybridnet::report
