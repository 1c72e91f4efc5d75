#include "weakam/value_field.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

namespace weakam {

double ValueField::interpolate(double x, double t) const {
    const int nx = grid.nx, nt = grid.nt;
    double xs = (x - std::floor(x)) * nx;
    double ts = (t - std::floor(t)) * nt;
    int i0 = static_cast<int>(xs), j0 = static_cast<int>(ts);
    if (i0 >= nx) i0 = nx - 1;
    if (j0 >= nt) j0 = nt - 1;
    double fx = xs - i0, ft = ts - j0;
    int i1 = (i0 + 1) % nx, j1 = (j0 + 1) % nt;
    return (1 - fx) * (1 - ft) * at(i0, j0) + fx * (1 - ft) * at(i1, j0) +
           (1 - fx) * ft * at(i0, j1) + fx * ft * at(i1, j1);
}

ValueField::LipschitzReport ValueField::lipschitz() const {
    LipschitzReport r;
    const int nx = grid.nx, nt = grid.nt;
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < nt; ++j) {
            r.lx = std::max(r.lx, std::abs(at((i + 1) % nx, j) - at(i, j)) / grid.dx());
            r.lt = std::max(r.lt, std::abs(at(i, (j + 1) % nt) - at(i, j)) / grid.dt());
        }
    return r;
}

double ValueField::interp_error_estimate() const {
    const int nx = grid.nx, nt = grid.nt;
    double dxx = 0.0, dtt = 0.0;
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < nt; ++j) {
            dxx = std::max(dxx,
                           std::abs(at((i + 1) % nx, j) - 2 * at(i, j) + at((i + nx - 1) % nx, j)));
            dtt = std::max(dtt,
                           std::abs(at(i, (j + 1) % nt) - 2 * at(i, j) + at(i, (j + nt - 1) % nt)));
        }
    return dxx / 8.0 + dtt / 8.0;
}

double ValueField::sup_norm() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
}

double ValueField::max_abs_diff(const ValueField& other) const {
    double m = 0.0;
    for (std::size_t k = 0; k < values.size(); ++k)
        m = std::max(m, std::abs(values[k] - other.values[k]));
    return m;
}

void ValueField::save_json(const std::string& path) const {
    nlohmann::json j;
    j["nx"] = grid.nx;
    j["nt"] = grid.nt;
    j["v_max"] = grid.v_max;
    j["alpha"] = alpha;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(model_hash));
    j["model_hash"] = buf;
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(family_hash));
    j["family_hash"] = buf;
    j["values"] = values; // row-major in x: values[i*nt + j]
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open '" + path + "' for writing");
    out << j.dump(2) << "\n";
}

void ValueField::save_csv(const std::string& path) const {
    std::FILE* fp = std::fopen(path.c_str(), "wb");
    if (!fp) throw ConfigError("cannot open '" + path + "' for writing");
    std::fprintf(fp, "x,t,u\n");
    for (int i = 0; i < grid.nx; ++i)
        for (int j = 0; j < grid.nt; ++j)
            std::fprintf(fp, "%.17g,%.17g,%.17g\n", i * grid.dx(), j * grid.dt(), at(i, j));
    std::fclose(fp);
}

ValueField ValueField::load_json(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path + "' for reading");
    nlohmann::json j;
    in >> j;
    ValueField u;
    u.grid.nx = j.at("nx").get<int>();
    u.grid.nt = j.at("nt").get<int>();
    u.grid.v_max = j.value("v_max", 0.0);
    u.alpha = j.at("alpha").get<double>();
    u.values = j.at("values").get<std::vector<double>>();
    if (u.values.size() != static_cast<std::size_t>(u.grid.nx) * u.grid.nt)
        throw ConfigError("value field '" + path + "': values length mismatch");
    u.model_hash = std::strtoull(j.value("model_hash", std::string("0")).c_str(), nullptr, 16);
    u.family_hash = std::strtoull(j.value("family_hash", std::string("0")).c_str(), nullptr, 16);
    return u;
}

} // namespace weakam
