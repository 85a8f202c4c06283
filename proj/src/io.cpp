#include "latq/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "latq/assets.hpp"

namespace latq {

namespace {

std::string_view strip(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

// Splits on runs of spaces/tabs.
std::vector<std::string_view> split_words(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
        std::size_t j = i;
        while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
        if (j > i) out.push_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

// Iterates content lines: comments stripped, blanks skipped, 1-based numbers.
struct LineReader {
    std::string_view text;
    std::size_t pos = 0;
    int line_no = 0;

    bool next(std::string_view& out) {
        while (pos <= text.size()) {
            if (pos == text.size()) return false;
            std::size_t end = text.find('\n', pos);
            if (end == std::string_view::npos) end = text.size();
            std::string_view line = text.substr(pos, end - pos);
            pos = end + (end < text.size() ? 1 : 0);
            ++line_no;
            const std::size_t hash = line.find('#');
            if (hash != std::string_view::npos) line = line.substr(0, hash);
            line = strip(line);
            if (line.empty()) continue;
            out = line;
            return true;
        }
        return false;
    }
};

[[noreturn]] void fail(int line, const std::string& msg) { throw ParseError(line, msg); }

std::int64_t parse_int_at(std::string_view word, int line) {
    std::int64_t v = 0;
    const auto res = std::from_chars(word.data(), word.data() + word.size(), v);
    if (res.ec != std::errc{} || res.ptr != word.data() + word.size()) {
        fail(line, "expected an integer, got '" + std::string(word) + "'");
    }
    return v;
}

double parse_double_at(std::string_view word, int line) {
    double v = 0.0;
    const auto res = std::from_chars(word.data(), word.data() + word.size(), v);
    if (res.ec != std::errc{} || res.ptr != word.data() + word.size()) {
        fail(line, "expected a number, got '" + std::string(word) + "'");
    }
    return v;
}

// "key=value" accessor for instruction attributes.
bool split_attr(std::string_view word, std::string_view& key, std::string_view& value) {
    const std::size_t eq = word.find('=');
    if (eq == std::string_view::npos) return false;
    key = word.substr(0, eq);
    value = word.substr(eq + 1);
    return true;
}

const char* metric_name(DistanceMetric m) {
    return m == DistanceMetric::Euclidean ? "euclidean" : "manhattan";
}

DistanceMetric metric_from_name(std::string_view name, int line) {
    if (name == "euclidean") return DistanceMetric::Euclidean;
    if (name == "manhattan") return DistanceMetric::Manhattan;
    fail(line, "unknown distance metric '" + std::string(name) + "'");
}

GateKind kind_at(std::string_view word, int line) {
    const auto kind = kind_from_name(word);
    if (!kind) fail(line, "unknown gate kind '" + std::string(word) + "'");
    return *kind;
}

void check_field_text(const std::string& s) {
    for (const char c : s) {
        if (c == ' ' || c == '\t' || c == '\n' || c == '=' || c == ',') {
            throw std::invalid_argument("record field may not contain whitespace, '=' or ',': '" +
                                        s + "'");
        }
    }
    if (s.empty()) throw std::invalid_argument("record field may not be empty");
}

} // namespace

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string format_int(std::int64_t v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) { return parse_double_at(strip(text), 0); }

std::int64_t parse_int(std::string_view text) { return parse_int_at(strip(text), 0); }

std::uint64_t fnv1a64(std::string_view text) {
    std::uint64_t h = 1469598103934665603ull;
    for (const char c : text) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    return h;
}

std::string format_circuit(const CircuitTensor& tensor) {
    require_valid(tensor);
    std::string out = "circuit v1\n";
    out += "steps " + format_int(tensor.dims.time_steps) + "\n";
    out += "extents " + format_int(tensor.dims.extent_x());
    if (tensor.dims.rank() == 2) out += " " + format_int(tensor.dims.extent_y());
    out += "\n";
    out += "modulus " + format_int(tensor.dims.angle_modulus) + "\n";
    for (const Instruction& ins : decode_instructions(tensor)) {
        out += kind_name(ins.kind);
        out += " t=" + format_int(ins.t);
        out += " x=" + format_int(ins.q.x);
        out += " y=" + format_int(ins.q.y);
        if (is_parametric(ins.kind)) out += " k=" + format_int(ins.angle);
        if (ins.q2.has_value()) {
            out += ins.q2->x == ins.q.x + 1 ? " dir=+x" : " dir=+y";
        }
        out += "\n";
    }
    return out;
}

CircuitTensor parse_circuit(std::string_view text) {
    LineReader reader{text};
    std::string_view line;
    if (!reader.next(line) || line != "circuit v1") {
        fail(reader.line_no, "expected 'circuit v1' header");
    }

    LatticeDims dims;
    bool have_steps = false, have_extents = false, have_modulus = false;
    InstructionList instructions;

    while (reader.next(line)) {
        const auto words = split_words(line);
        const std::string_view head = words[0];
        if (head == "steps") {
            if (words.size() != 2) fail(reader.line_no, "steps takes one value");
            dims.time_steps = static_cast<int>(parse_int_at(words[1], reader.line_no));
            have_steps = true;
            continue;
        }
        if (head == "extents") {
            if (words.size() != 2 && words.size() != 3) {
                fail(reader.line_no, "extents takes one or two values");
            }
            dims.qubit_extents.clear();
            for (std::size_t i = 1; i < words.size(); ++i) {
                dims.qubit_extents.push_back(
                    static_cast<int>(parse_int_at(words[i], reader.line_no)));
            }
            have_extents = true;
            continue;
        }
        if (head == "modulus") {
            if (words.size() != 2) fail(reader.line_no, "modulus takes one value");
            dims.angle_modulus = parse_int_at(words[1], reader.line_no);
            have_modulus = true;
            continue;
        }

        const auto kind = kind_from_name(head);
        if (!kind || *kind == GateKind::Idle || *kind == GateKind::Busy) {
            fail(reader.line_no, "unknown directive or gate '" + std::string(head) + "'");
        }
        if (!have_steps || !have_extents || !have_modulus) {
            fail(reader.line_no, "instructions before steps/extents/modulus header");
        }
        Instruction ins;
        ins.kind = *kind;
        bool have_t = false, have_x = false, have_y = false, have_k = false, have_dir = false;
        bool dir_plus_x = true;
        for (std::size_t i = 1; i < words.size(); ++i) {
            std::string_view key, value;
            if (!split_attr(words[i], key, value)) {
                fail(reader.line_no, "expected key=value, got '" + std::string(words[i]) + "'");
            }
            if (key == "t") {
                ins.t = static_cast<int>(parse_int_at(value, reader.line_no));
                have_t = true;
            } else if (key == "x") {
                ins.q.x = static_cast<int>(parse_int_at(value, reader.line_no));
                have_x = true;
            } else if (key == "y") {
                ins.q.y = static_cast<int>(parse_int_at(value, reader.line_no));
                have_y = true;
            } else if (key == "k") {
                if (!is_parametric(ins.kind)) {
                    fail(reader.line_no, std::string(kind_name(ins.kind)) + " takes no angle");
                }
                ins.angle = parse_int_at(value, reader.line_no);
                have_k = true;
            } else if (key == "dir") {
                if (!is_two_qubit(ins.kind)) {
                    fail(reader.line_no, std::string(kind_name(ins.kind)) + " takes no dir");
                }
                if (value == "+x") {
                    dir_plus_x = true;
                } else if (value == "+y") {
                    dir_plus_x = false;
                } else {
                    fail(reader.line_no, "dir must be +x or +y");
                }
                have_dir = true;
            } else {
                fail(reader.line_no, "unknown attribute '" + std::string(key) + "'");
            }
        }
        if (!have_t || !have_x || !have_y) fail(reader.line_no, "instruction needs t=, x=, y=");
        if (is_parametric(ins.kind) && !have_k) {
            fail(reader.line_no, std::string(kind_name(ins.kind)) + " needs k=");
        }
        if (is_two_qubit(ins.kind)) {
            if (!have_dir) fail(reader.line_no, std::string(kind_name(ins.kind)) + " needs dir=");
            ins.q2 = dir_plus_x ? QubitCoord{ins.q.x + 1, ins.q.y}
                                : QubitCoord{ins.q.x, ins.q.y + 1};
        }
        instructions.push_back(ins);
    }
    if (!have_steps || !have_extents || !have_modulus) {
        fail(reader.line_no, "missing steps/extents/modulus header");
    }
    return encode_instructions(instructions, dims);
}

std::string format_machine(const MachineSpec& machine) {
    std::string out = "machine v1\n";
    out += "name " + machine.name + "\n";
    out += "rank " + format_int(machine.lattice_rank) + "\n";
    if (!machine.extents.empty()) {
        out += "extents";
        for (const int e : machine.extents) out += " " + format_int(e);
        out += "\n";
    }
    for (const auto& [kind, v] : machine.gate_infidelity) {
        out += std::string("gate ") + kind_name(kind) + " " + format_double(v) + "\n";
    }
    out += "idle " + format_double(machine.idle_infidelity) + "\n";
    for (const CrosstalkKernel& k : machine.kernels) {
        out += std::string("kernel ") + kind_name(k.kind_a) + " " + kind_name(k.kind_b) + " " +
               format_double(k.coefficient) + " " + format_double(k.exponent) + " " +
               metric_name(k.metric) + "\n";
    }
    if (machine.swap_area.enabled) {
        out += "swap_area on " + format_double(machine.swap_area.penalty);
        for (const GateKind kind : machine.swap_area.allowed) {
            out += std::string(" ") + kind_name(kind);
        }
        out += "\n";
    } else {
        out += "swap_area off\n";
    }
    out += std::string("ordered_pairs ") + (machine.ordered_pairs ? "on" : "off") + "\n";
    return out;
}

MachineSpec parse_machine(std::string_view text) {
    LineReader reader{text};
    std::string_view line;
    if (!reader.next(line) || line != "machine v1") {
        fail(reader.line_no, "expected 'machine v1' header");
    }

    MachineSpec machine;
    bool have_name = false;
    while (reader.next(line)) {
        const auto words = split_words(line);
        const std::string_view head = words[0];
        if (head == "name") {
            if (words.size() != 2) fail(reader.line_no, "name takes one value");
            machine.name = std::string(words[1]);
            have_name = true;
        } else if (head == "rank") {
            if (words.size() != 2) fail(reader.line_no, "rank takes one value");
            machine.lattice_rank = static_cast<int>(parse_int_at(words[1], reader.line_no));
        } else if (head == "extents") {
            if (words.size() != 2 && words.size() != 3) {
                fail(reader.line_no, "extents takes one or two values");
            }
            machine.extents.clear();
            for (std::size_t i = 1; i < words.size(); ++i) {
                machine.extents.push_back(static_cast<int>(parse_int_at(words[i], reader.line_no)));
            }
        } else if (head == "gate") {
            if (words.size() != 3) fail(reader.line_no, "gate takes a kind and a value");
            machine.gate_infidelity[kind_at(words[1], reader.line_no)] =
                parse_double_at(words[2], reader.line_no);
        } else if (head == "idle") {
            if (words.size() != 2) fail(reader.line_no, "idle takes one value");
            machine.idle_infidelity = parse_double_at(words[1], reader.line_no);
        } else if (head == "kernel") {
            if (words.size() != 6) {
                fail(reader.line_no, "kernel takes kind kind coefficient exponent metric");
            }
            CrosstalkKernel k;
            k.kind_a = kind_at(words[1], reader.line_no);
            k.kind_b = kind_at(words[2], reader.line_no);
            k.coefficient = parse_double_at(words[3], reader.line_no);
            k.exponent = parse_double_at(words[4], reader.line_no);
            k.metric = metric_from_name(words[5], reader.line_no);
            machine.kernels.push_back(k);
        } else if (head == "swap_area") {
            if (words.size() < 2) fail(reader.line_no, "swap_area takes on/off");
            if (words[1] == "off") {
                if (words.size() != 2) fail(reader.line_no, "swap_area off takes no arguments");
                machine.swap_area.enabled = false;
            } else if (words[1] == "on") {
                if (words.size() < 3) fail(reader.line_no, "swap_area on needs a penalty");
                machine.swap_area.enabled = true;
                machine.swap_area.penalty = parse_double_at(words[2], reader.line_no);
                machine.swap_area.allowed.clear();
                for (std::size_t i = 3; i < words.size(); ++i) {
                    machine.swap_area.allowed.push_back(kind_at(words[i], reader.line_no));
                }
            } else {
                fail(reader.line_no, "swap_area takes on/off");
            }
        } else if (head == "ordered_pairs") {
            if (words.size() != 2 || (words[1] != "on" && words[1] != "off")) {
                fail(reader.line_no, "ordered_pairs takes on/off");
            }
            machine.ordered_pairs = words[1] == "on";
        } else {
            fail(reader.line_no, "unknown machine key '" + std::string(head) + "'");
        }
    }
    if (!have_name) fail(reader.line_no, "machine file needs a name");
    return machine;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw std::runtime_error("short write to '" + path + "'");
}

CircuitTensor load_circuit(const std::string& name_or_path) {
    const std::string asset_name = "circuits/" + name_or_path + ".circ";
    if (assets::contains(asset_name)) return parse_circuit(assets::find(asset_name));
    return parse_circuit(read_text_file(name_or_path));
}

MachineSpec load_machine(const std::string& name_or_path) {
    const std::string asset_name = "machines/" + name_or_path + ".mf";
    if (assets::contains(asset_name)) return parse_machine(assets::find(asset_name));
    return parse_machine(read_text_file(name_or_path));
}

void ResultRecord::put(std::string key, std::string value) {
    check_field_text(key);
    check_field_text(value);
    fields.emplace_back(std::move(key), std::move(value));
}

void ResultRecord::put(std::string key, const char* value) { put(std::move(key), std::string(value)); }
void ResultRecord::put(std::string key, double value) { put(std::move(key), format_double(value)); }
void ResultRecord::put(std::string key, std::int64_t value) { put(std::move(key), format_int(value)); }
void ResultRecord::put(std::string key, int value) {
    put(std::move(key), format_int(static_cast<std::int64_t>(value)));
}

void ResultRecord::put(std::string key, std::uint64_t value) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    put(std::move(key), std::string(buf, res.ptr));
}

std::string ResultRecord::to_line() const {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i > 0) out += ' ';
        out += fields[i].first;
        out += '=';
        out += fields[i].second;
    }
    return out;
}

ResultRecord parse_record(std::string_view line) {
    ResultRecord rec;
    for (const std::string_view word : split_words(strip(line))) {
        std::string_view key, value;
        if (!split_attr(word, key, value) || key.empty() || value.empty()) {
            fail(0, "expected key=value, got '" + std::string(word) + "'");
        }
        rec.fields.emplace_back(std::string(key), std::string(value));
    }
    return rec;
}

std::vector<ResultRecord> parse_records(std::string_view text) {
    std::vector<ResultRecord> out;
    LineReader reader{text};
    std::string_view line;
    while (reader.next(line)) out.push_back(parse_record(line));
    return out;
}

std::string records_to_csv(const std::vector<ResultRecord>& records) {
    std::vector<std::string> keys;
    std::map<std::string, std::size_t> column;
    for (const ResultRecord& rec : records) {
        for (const auto& [key, value] : rec.fields) {
            (void)value;
            if (column.find(key) == column.end()) {
                column.emplace(key, keys.size());
                keys.push_back(key);
            }
        }
    }
    std::string out;
    for (std::size_t i = 0; i < keys.size(); ++i) {
        if (i > 0) out += ',';
        out += keys[i];
    }
    out += '\n';
    std::vector<std::string> row;
    for (const ResultRecord& rec : records) {
        row.assign(keys.size(), "");
        for (const auto& [key, value] : rec.fields) {
            row[column[key]] = value;
        }
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i > 0) out += ',';
            out += row[i];
        }
        out += '\n';
    }
    return out;
}

} // namespace latq
