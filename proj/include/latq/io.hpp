#pragma once

// Text formats: circuit files, machine files, line-delimited result records,
// and the CSV exporter. Every format has a canonical form that round-trips
// byte-exactly through parse and format; numbers are written with the
// shortest representation that parses back to the same value.

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "latq/cost.hpp"
#include "latq/lattice.hpp"
#include "latq/rules.hpp"

namespace latq {

// Shortest round-trip formatting (std::to_chars); locale-independent.
std::string format_double(double v);
std::string format_int(std::int64_t v);
// Strict full-string parses; throw ParseError(0) on trailing garbage.
double parse_double(std::string_view text);
std::int64_t parse_int(std::string_view text);

std::uint64_t fnv1a64(std::string_view text);

// Circuit file: "circuit v1" header, then steps / extents / modulus lines,
// then one line per non-idle instruction in (t, y, x) order, e.g.
//   H t=1 x=2 y=0
//   RZ t=4 x=0 y=0 k=3
//   CZ t=2 x=2 y=0 dir=+x
// Blank lines and '#' comments are accepted on parse, absent canonically.
std::string format_circuit(const CircuitTensor& tensor);
CircuitTensor parse_circuit(std::string_view text);

// Machine file: "machine v1" header, then name / rank / extents? / gate... /
// idle / kernel... / swap_area / ordered_pairs lines. Unknown keys are
// rejected. Canonical order is fixed and gate lines follow kind order.
std::string format_machine(const MachineSpec& machine);
MachineSpec parse_machine(std::string_view text);

// Built-in asset ("circuits/<name>.circ" / "machines/<name>.mf") when one
// exists, else the path itself. Parse errors propagate.
CircuitTensor load_circuit(const std::string& name_or_path);
MachineSpec load_machine(const std::string& name_or_path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view text);

// One experiment observation: ordered key=value fields, one line per record.
// Keys and values must be free of whitespace, '=', and ','.
struct ResultRecord {
    std::vector<std::pair<std::string, std::string>> fields;

    void put(std::string key, std::string value);
    void put(std::string key, const char* value);
    void put(std::string key, double value);
    void put(std::string key, std::int64_t value);
    void put(std::string key, std::uint64_t value);
    void put(std::string key, int value);

    std::string to_line() const;
};

ResultRecord parse_record(std::string_view line);
std::vector<ResultRecord> parse_records(std::string_view text); // skips blank lines

// Header = union of keys in first-appearance order; missing fields are empty.
std::string records_to_csv(const std::vector<ResultRecord>& records);

} // namespace latq
