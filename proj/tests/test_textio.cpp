#include <doctest.h>

#include <saptlem/errors.hpp>
#include <saptlem/textio.hpp>

#include <filesystem>

using namespace saptlem;

TEST_CASE("format_double round-trips shortest representations") {
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(-3.0) == "-3");
    CHECK(format_double(5e-06) == "5e-06");
    CHECK(parse_double(format_double(0.30000000000000004)) == 0.30000000000000004);
    CHECK(parse_double(format_double(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("parse_double accepts full tokens only") {
    CHECK(parse_double("2.5e3") == 2500.0);
    CHECK(parse_double("-0.125") == -0.125);
    CHECK_THROWS_AS(parse_double("1.5x"), IoError);
    CHECK_THROWS_AS(parse_double(""), IoError);
    CHECK_THROWS_AS(parse_double("nanx"), IoError);
}

TEST_CASE("parse_int accepts full tokens only") {
    CHECK(parse_int("42") == 42);
    CHECK(parse_int("-7") == -7);
    CHECK_THROWS_AS(parse_int("12.5"), IoError);
    CHECK_THROWS_AS(parse_int("twelve"), IoError);
}

TEST_CASE("split keeps empty fields") {
    const auto parts = split("a,,b,", ',');
    REQUIRE(parts.size() == 4);
    CHECK(parts[0] == "a");
    CHECK(parts[1] == "");
    CHECK(parts[2] == "b");
    CHECK(parts[3] == "");
    CHECK(split("", ',').size() == 1);
}

TEST_CASE("text files round-trip and create parent directories") {
    const auto dir = std::filesystem::temp_directory_path() / "saptlem_textio";
    std::filesystem::remove_all(dir);
    const auto path = dir / "nested" / "file.txt";
    write_text_file(path, "line1\nline2\n");
    CHECK(read_text_file(path) == "line1\nline2\n");
    CHECK_THROWS_AS(read_text_file(dir / "missing.txt"), IoError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("TextTable renders header plus rows with trailing newline") {
    TextTable table("a,b");
    table.add_row("1,2");
    table.add_row("3,4");
    CHECK(table.str() == "a,b\n1,2\n3,4\n");
}
