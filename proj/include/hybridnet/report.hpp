#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace hybridnet::report {

inline constexpr int kSchemaVersion = 1;

/// Marker written for cells with no defined value.
inline constexpr std::string_view kUndefined = "undefined";

struct Undefined {
    bool operator==(const Undefined&) const = default;
};

using Cell = std::variant<Undefined, double, std::int64_t, bool, std::string>;

/// Tabular command output plus run metadata.
struct OutputRecord {
    int schema_version = kSchemaVersion;
    std::string command;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
    std::vector<std::pair<std::string, Cell>> metadata;

    /// Non-finite doubles become Undefined. Throws if the width is wrong.
    void add_row(std::vector<Cell> row);
};

enum class Format { Csv, Json };

Format parse_format(std::string_view text);

/// RFC 4180 style: header row, comma separated, CRLF-free ("\n") line ends,
/// fields quoted only when they contain a comma, quote or newline.
void write_csv(std::ostream& out, const OutputRecord& record);

/// One JSON document: {schema_version, command, metadata, columns, rows:[{...}]}.
/// Undefined cells are emitted as null.
void write_json(std::ostream& out, const OutputRecord& record);

void write(std::ostream& out, const OutputRecord& record, Format format);

}  // namespace hybridnet::report
