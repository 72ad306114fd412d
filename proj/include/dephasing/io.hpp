#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "core.hpp"
#include "scattering.hpp"

namespace dephasing::io {

// Shortest form that still roundtrips: 17 significant digits.
inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    void add(std::vector<double> row) {
        detail::require(row.size() == header.size(), "row width does not match header");
        rows.push_back(std::move(row));
    }
    std::size_t column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        throw InvalidArgument("missing column '" + name + "'");
    }
    std::vector<double> values(const std::string& name) const {
        const std::size_t c = column(name);
        std::vector<double> v;
        v.reserve(rows.size());
        for (const auto& r : rows) v.push_back(r[c]);
        return v;
    }
};

inline void write_csv(std::ostream& os, const Table& t) {
    for (std::size_t i = 0; i < t.header.size(); ++i) os << (i ? "," : "") << t.header[i];
    os << '\n';
    for (const auto& r : t.rows) {
        for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << fmt(r[i]);
        os << '\n';
    }
}

inline void write_csv(const std::string& path, const Table& t) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InvalidArgument("cannot open '" + path + "' for writing");
    write_csv(f, t);
    if (!f) throw InvalidArgument("write to '" + path + "' failed");
}

inline Table read_csv(std::istream& is, const std::string& what = "csv") {
    Table t;
    std::string line;
    if (!std::getline(is, line)) throw InvalidArgument(what + ": empty file");
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
            while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
            t.header.push_back(cell);
        }
    }
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> row;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t used = 0;
                row.push_back(std::stod(cell, &used));
            } catch (const std::exception&) {
                throw InvalidArgument(what + ":" + std::to_string(lineno) + ": not a number: '" + cell + "'");
            }
        }
        if (row.size() != t.header.size())
            throw InvalidArgument(what + ":" + std::to_string(lineno) + ": expected " + std::to_string(t.header.size()) +
                                  " columns, got " + std::to_string(row.size()));
        t.rows.push_back(std::move(row));
    }
    return t;
}

inline Table read_csv(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw InvalidArgument("cannot open '" + path + "'");
    return read_csv(f, path);
}

inline Table scatter_table(const ScatterResult& s, const std::vector<cplx>* z = nullptr) {
    Table t;
    t.header = {"delta", "re_t", "im_t", "re_r", "im_r", "re_rloss", "im_rloss"};
    if (z) {
        t.header.push_back("z_re");
        t.header.push_back("z_im");
    }
    const auto& g = s.transmittance.grid;
    for (std::size_t i = 0; i < g.size(); ++i) {
        std::vector<double> r = {g[i],
                                 s.transmittance[i].real(),
                                 s.transmittance[i].imag(),
                                 s.reflectance[i].real(),
                                 s.reflectance[i].imag(),
                                 s.loss_reflectance[i].real(),
                                 s.loss_reflectance[i].imag()};
        if (z) {
            r.push_back((*z)[i].real());
            r.push_back((*z)[i].imag());
        }
        t.add(std::move(r));
    }
    return t;
}

inline Table envelope_table(const EnvelopeCurve& c) {
    Table t;
    t.header = {"t", "re_C", "im_C"};
    const bool se = !c.std_error.empty();
    if (se) t.header.push_back("stderr");
    for (std::size_t k = 0; k < c.times.size(); ++k) {
        std::vector<double> r = {c.times[k], c.values[k].real(), c.values[k].imag()};
        if (se) r.push_back(c.std_error[k]);
        t.add(std::move(r));
    }
    return t;
}

struct MeasuredTransmittance {
    FrequencyGrid grid;
    std::vector<cplx> t;
    bool has_imag = false;
};

// Reads the scattering schema; im_t is optional (power-only data).
inline MeasuredTransmittance transmittance_from_table(const Table& tab) {
    MeasuredTransmittance m{FrequencyGrid(tab.values("delta")), {}, false};
    const auto re = tab.values("re_t");
    std::vector<double> im(re.size(), 0.0);
    for (const auto& h : tab.header)
        if (h == "im_t") {
            im = tab.values("im_t");
            m.has_imag = true;
        }
    for (std::size_t i = 0; i < re.size(); ++i) m.t.emplace_back(re[i], im[i]);
    return m;
}

}  // namespace dephasing::io
