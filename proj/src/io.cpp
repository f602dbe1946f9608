#include "mssv/io.hpp"

#include "mssv/mc.hpp"
#include "mssv/model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mssv {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

namespace {

void dump_into(const Json& j, std::string& out) {
    switch (j.type()) {
    case Json::value_t::object: {
        out += '{';
        bool first = true;
        for (const auto& [key, value] : j.items()) {
            if (!first) out += ',';
            first = false;
            out += Json(key).dump();
            out += ':';
            dump_into(value, out);
        }
        out += '}';
        break;
    }
    case Json::value_t::array: {
        out += '[';
        for (std::size_t i = 0; i < j.size(); ++i) {
            if (i > 0) out += ',';
            dump_into(j[i], out);
        }
        out += ']';
        break;
    }
    case Json::value_t::number_float: {
        const double v = j.get<double>();
        // JSON has no inf/nan literals
        out += std::isfinite(v) ? format_double(v) : "null";
        break;
    }
    default:
        out += j.dump();
    }
}

double require(const Json& j, const char* key) {
    if (!j.contains(key)) throw std::invalid_argument(std::string("missing field '") + key + "'");
    if (!j.at(key).is_number()) throw std::invalid_argument(std::string("field '") + key + "' must be a number");
    return j.at(key).get<double>();
}

}  // namespace

std::string dump_json(const Json& j) {
    std::string out;
    dump_into(j, out);
    return out;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file_atomic(const std::string& path, const std::string& contents) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write '" + path + "'");
        out << contents;
        if (!out.flush()) {
            std::remove(tmp.c_str());
            throw std::runtime_error("write failed for '" + path + "'");
        }
    }
    std::filesystem::rename(tmp, path);
}

ModelSpec model_spec_from_json(const Json& j) {
    if (!j.is_object()) throw std::invalid_argument("model config must be a JSON object");
    static const char* const known[] = {"r",   "rho1", "rho2", "rho12", "eps", "del",    "m_y",
                                        "nu_y", "m_z", "nu_z", "a",     "b",   "gamma1", "gamma2"};
    for (const auto& [key, value] : j.items()) {
        if (std::find(std::begin(known), std::end(known), key) == std::end(known))
            throw std::invalid_argument("unknown model field '" + key + "'");
    }
    ModelSpec s;
    s.r = require(j, "r");
    s.rho1 = require(j, "rho1");
    s.rho2 = require(j, "rho2");
    s.rho12 = require(j, "rho12");
    s.eps = require(j, "eps");
    s.del = require(j, "del");
    s.m_y = require(j, "m_y");
    s.nu_y = require(j, "nu_y");
    s.m_z = require(j, "m_z");
    s.nu_z = require(j, "nu_z");
    s.a = require(j, "a");
    s.b = require(j, "b");
    s.gamma1 = require(j, "gamma1");
    s.gamma2 = require(j, "gamma2");
    s.validate();
    return s;
}

Json to_json(const ModelSpec& s) {
    return Json{{"r", s.r},       {"rho1", s.rho1}, {"rho2", s.rho2}, {"rho12", s.rho12}, {"eps", s.eps},
                {"del", s.del},   {"m_y", s.m_y},   {"nu_y", s.nu_y}, {"m_z", s.m_z},     {"nu_z", s.nu_z},
                {"a", s.a},       {"b", s.b},       {"gamma1", s.gamma1}, {"gamma2", s.gamma2}};
}

GroupParams group_params_from_json(const Json& j) {
    if (!j.is_object()) throw std::invalid_argument("group parameters must be a JSON object");
    GroupParams gp = GroupParams::reduced(require(j, "sigma_star"), require(j, "v0"), require(j, "v1"),
                                          require(j, "v3"));
    if (j.contains("sigma_bar")) gp.sigma_bar = require(j, "sigma_bar");
    if (j.contains("v2")) gp.v2 = require(j, "v2");
    if (j.contains("z")) gp.z = require(j, "z");
    if (!(gp.sigma_star > 0.0)) throw std::invalid_argument("sigma_star must be positive");
    if (!(gp.sigma_bar > 0.0)) throw std::invalid_argument("sigma_bar must be positive");
    return gp;
}

Json to_json(const GroupParams& gp) {
    return Json{{"sigma_bar", gp.sigma_bar}, {"sigma_star", gp.sigma_star}, {"v0", gp.v0}, {"v1", gp.v1},
                {"v2", gp.v2},               {"v3", gp.v3},                 {"z", gp.z}};
}

Json to_json(const Estimate& e) {
    return Json{{"mean", e.mean}, {"stderr", e.std_error}, {"n_paths", e.n_paths}, {"seed", e.seed}};
}

std::size_t CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    throw std::invalid_argument("CSV column '" + name + "' not found");
}

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        const auto b = cell.find_first_not_of(" \t\r");
        const auto e = cell.find_last_not_of(" \t\r");
        cells.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
    }
    return cells;
}

}  // namespace

CsvTable read_csv(std::istream& in) {
    CsvTable t;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto cells = split(line);
        if (t.header.empty()) {
            t.header = std::move(cells);
            continue;
        }
        if (cells.size() != t.header.size())
            throw std::invalid_argument("CSV line " + std::to_string(lineno) + ": expected " +
                                        std::to_string(t.header.size()) + " fields");
        std::vector<double> row;
        for (const auto& c : cells) {
            double v = 0.0;
            const auto res = std::from_chars(c.data(), c.data() + c.size(), v);
            if (res.ec != std::errc() || res.ptr != c.data() + c.size())
                throw std::invalid_argument("CSV line " + std::to_string(lineno) + ": bad number '" + c + "'");
            row.push_back(v);
        }
        t.rows.push_back(std::move(row));
    }
    if (t.header.empty()) throw std::invalid_argument("CSV input is empty");
    return t;
}

std::string to_csv(const CsvTable& table) {
    std::string out;
    for (std::size_t i = 0; i < table.header.size(); ++i) {
        if (i > 0) out += ',';
        out += table.header[i];
    }
    out += '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i > 0) out += ',';
            out += format_double(row[i]);
        }
        out += '\n';
    }
    return out;
}

}  // namespace mssv
