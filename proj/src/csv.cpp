#include "simpson/csv.hpp"

#include <algorithm>
#include <charconv>
#include <optional>
#include <istream>

namespace simpson {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

} // namespace

CsvContent read_csv(std::istream& is, const std::string& origin) {
    CsvContent content;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_fields(line);
        if (content.header.empty()) {
            content.header = std::move(fields);
            continue;
        }
        if (fields.size() != content.header.size()) {
            throw DataError(origin + ":" + std::to_string(line_no) + ": expected " +
                            std::to_string(content.header.size()) + " fields, got " +
                            std::to_string(fields.size()));
        }
        content.rows.push_back(std::move(fields));
        content.line_numbers.push_back(line_no);
    }
    if (content.header.empty()) {
        throw DataError(origin + ": no header line");
    }
    return content;
}

ContingencyTable table_from_csv(std::istream& is, bool counts_mode, const std::string& origin) {
    const CsvContent content = read_csv(is, origin);

    std::size_t count_column = content.header.size();
    if (counts_mode) {
        auto it = std::find(content.header.begin(), content.header.end(), "count");
        if (it == content.header.end()) {
            throw DataError(origin + ": counts mode needs a column named 'count'");
        }
        count_column = static_cast<std::size_t>(it - content.header.begin());
    }

    std::vector<std::size_t> variable_columns;
    for (std::size_t c = 0; c < content.header.size(); ++c) {
        if (c != count_column) variable_columns.push_back(c);
    }
    if (variable_columns.empty()) {
        throw DataError(origin + ": no variable columns");
    }
    if (content.rows.empty()) {
        throw DataError(origin + ": no data rows to infer states from");
    }

    std::vector<Variable> schema;
    for (std::size_t c : variable_columns) {
        Variable var;
        var.name = content.header[c];
        for (const auto& row : content.rows) {
            if (std::find(var.states.begin(), var.states.end(), row[c]) == var.states.end()) {
                var.states.push_back(row[c]);
            }
        }
        if (var.states.size() < 2) {
            throw DataError(origin + ": column '" + var.name +
                            "' has fewer than 2 distinct states");
        }
        schema.push_back(std::move(var));
    }

    // Schema problems at this point come from the file, not the caller.
    std::optional<ContingencyTable> table;
    try {
        table.emplace(schema);
    } catch (const InvalidInput& e) {
        throw DataError(origin + ": " + e.what());
    }
    std::vector<std::size_t> indices(variable_columns.size());
    for (std::size_t r = 0; r < content.rows.size(); ++r) {
        const auto& row = content.rows[r];
        for (std::size_t k = 0; k < variable_columns.size(); ++k) {
            const auto& states = schema[k].states;
            auto it = std::find(states.begin(), states.end(), row[variable_columns[k]]);
            indices[k] = static_cast<std::size_t>(it - states.begin());
        }
        std::uint64_t count = 1;
        if (counts_mode) {
            const std::string& field = row[count_column];
            auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), count);
            if (ec != std::errc{} || ptr != field.data() + field.size()) {
                throw DataError(origin + ":" + std::to_string(content.line_numbers[r]) +
                                ": bad count '" + field + "'");
            }
        }
        table->add_indices(indices, count);
    }
    return std::move(*table);
}

} // namespace simpson
