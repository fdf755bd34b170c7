#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace saptlem {

/** Shortest decimal string that round-trips to the same double (to_chars). */
std::string format_double(double value);

/** Parse a double; throws IoError on malformed or trailing input. */
double parse_double(std::string_view text);

/** Parse a non-negative integer; throws IoError on malformed input. */
long long parse_int(std::string_view text);

/** Split on a delimiter; keeps empty fields. */
std::vector<std::string> split(std::string_view text, char delim);

/** Whole-file read; throws IoError if the file cannot be opened. */
std::string read_text_file(const std::filesystem::path& path);

/** Whole-file write, creating parent directories; throws IoError on failure. */
void write_text_file(const std::filesystem::path& path, std::string_view content);

/** Line accumulator for CSV-style artifacts; numbers go through format_double. */
class TextTable {
public:
    explicit TextTable(std::string header) { rows_.push_back(std::move(header)); }

    void add_row(std::string row) { rows_.push_back(std::move(row)); }

    std::string str() const;

    void write(const std::filesystem::path& path) const;

private:
    std::vector<std::string> rows_;
};

} // namespace saptlem
