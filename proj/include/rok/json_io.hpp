// JSON file formats and CSV export.
//
// Complex numbers are stored as [re, im] pairs; matrices as
// {"rows", "cols", "data": [[re, im], ...]} in row-major order. Kernel
// files may omit a (j,i) block when (i,j) is present; the missing block is
// completed by conjugate transpose. Files are written atomically
// (temp + rename).

#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rok/errors.hpp"
#include "rok/gaussian.hpp"
#include "rok/kernel.hpp"
#include "rok/kolmogorov.hpp"
#include "rok/matrix.hpp"
#include "rok/moment.hpp"

namespace rok {

using nlohmann::json;

inline json complex_to_json(const Complex& z) { return json::array({z.real(), z.imag()}); }

inline Complex complex_from_json(const json& j) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw ParseError("complex entry must be a [re, im] number pair");
    return Complex(j[0].get<double>(), j[1].get<double>());
}

inline json matrix_to_json(const ComplexMatrix& m) {
    json data = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) data.push_back(complex_to_json(m(i, j)));
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

inline ComplexMatrix matrix_from_json(const json& j) {
    if (!j.is_object() || !j.contains("rows") || !j.contains("cols") || !j.contains("data"))
        throw ParseError("matrix object needs rows, cols, data");
    const auto rows = j.at("rows").get<std::int64_t>();
    const auto cols = j.at("cols").get<std::int64_t>();
    if (rows < 0 || cols < 0) throw ParseError("matrix dimensions must be nonnegative");
    const json& data = j.at("data");
    if (!data.is_array() || data.size() != static_cast<std::size_t>(rows * cols))
        throw ParseError("matrix data length must equal rows*cols");
    ComplexMatrix m(rows, cols);
    std::size_t k = 0;
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = complex_from_json(data[k++]);
    return m;
}

inline json kernel_to_json(const OperatorKernel& k) {
    json blocks = json::object();
    for (std::size_t i = 0; i < k.num_points(); ++i)
        for (std::size_t j = 0; j < k.num_points(); ++j)
            blocks[std::to_string(i) + "," + std::to_string(j)] = matrix_to_json(k.block(i, j));
    return json{{"points", k.points()}, {"dim", k.dim()}, {"blocks", std::move(blocks)}};
}

inline OperatorKernel kernel_from_json(const json& j) {
    if (!j.is_object() || !j.contains("points") || !j.contains("dim") || !j.contains("blocks"))
        throw ParseError("kernel object needs points, dim, blocks");
    std::vector<std::string> points;
    try {
        points = j.at("points").get<std::vector<std::string>>();
    } catch (const json::exception&) {
        throw ParseError("kernel points must be an array of strings");
    }
    const auto dim = j.at("dim").get<std::int64_t>();
    if (dim < 1) throw ParseError("kernel dim must be >= 1");
    const std::size_t n = points.size();
    const json& in = j.at("blocks");
    if (!in.is_object()) throw ParseError("kernel blocks must be an object");

    std::map<std::pair<std::size_t, std::size_t>, ComplexMatrix> present;
    for (const auto& [key, value] : in.items()) {
        const auto comma = key.find(',');
        if (comma == std::string::npos) throw ParseError("block key '" + key + "' is not 'i,j'");
        std::size_t bi = 0, bj = 0;
        try {
            bi = std::stoul(key.substr(0, comma));
            bj = std::stoul(key.substr(comma + 1));
        } catch (const std::exception&) {
            throw ParseError("block key '" + key + "' is not 'i,j'");
        }
        if (bi >= n || bj >= n) throw ParseError("block key '" + key + "' out of range");
        present.emplace(std::make_pair(bi, bj), matrix_from_json(value));
    }

    std::vector<ComplexMatrix> blocks(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j2 = 0; j2 < n; ++j2) {
            auto it = present.find({i, j2});
            if (it != present.end()) {
                blocks[i * n + j2] = it->second;
                continue;
            }
            auto mirrored = present.find({j2, i});
            if (mirrored == present.end())
                throw ParseError("kernel block (" + std::to_string(i) + "," +
                                 std::to_string(j2) + ") missing and no mirror to complete it");
            blocks[i * n + j2] = mirrored->second.adjoint();
        }
    try {
        return OperatorKernel(std::move(points), static_cast<std::size_t>(dim),
                              std::move(blocks));
    } catch (const Error& e) {
        throw ParseError(std::string("invalid kernel: ") + e.what());
    }
}

inline json random_kernel_to_json(const RandomKernel& rk) {
    json atoms = json::array();
    for (const auto& a : rk.atoms())
        atoms.push_back(json{{"weight", a.weight}, {"kernel", kernel_to_json(a.kernel)}});
    return json{{"atoms", std::move(atoms)}};
}

inline RandomKernel random_kernel_from_json(const json& j) {
    if (!j.is_object() || !j.contains("atoms") || !j.at("atoms").is_array())
        throw ParseError("random kernel object needs an atoms array");
    std::vector<RandomKernel::Atom> atoms;
    for (const json& a : j.at("atoms")) {
        if (!a.is_object() || !a.contains("weight") || !a.contains("kernel"))
            throw ParseError("random kernel atom needs weight and kernel");
        atoms.push_back({a.at("weight").get<double>(), kernel_from_json(a.at("kernel"))});
    }
    try {
        return RandomKernel::discrete(std::move(atoms));
    } catch (const Error& e) {
        throw ParseError(std::string("invalid random kernel: ") + e.what());
    }
}

inline json factor_to_json(const KolmogorovFactor& f) {
    json factors = json::object();
    for (std::size_t i = 0; i < f.points.size(); ++i)
        factors[f.points[i]] = matrix_to_json(f.factors[i]);
    return json{{"rank", f.rank},
                {"dim", f.dim},
                {"points", f.points},
                {"factors", std::move(factors)}};
}

inline KolmogorovFactor factor_from_json(const json& j) {
    if (!j.is_object() || !j.contains("rank") || !j.contains("dim") || !j.contains("points") ||
        !j.contains("factors"))
        throw ParseError("factor object needs rank, dim, points, factors");
    KolmogorovFactor f;
    f.rank = j.at("rank").get<std::size_t>();
    f.dim = j.at("dim").get<std::size_t>();
    try {
        f.points = j.at("points").get<std::vector<std::string>>();
    } catch (const json::exception&) {
        throw ParseError("factor points must be an array of strings");
    }
    const json& factors = j.at("factors");
    for (const auto& name : f.points) {
        if (!factors.contains(name)) throw ParseError("factor missing point '" + name + "'");
        ComplexMatrix v = matrix_from_json(factors.at(name));
        if (v.rows() != static_cast<Eigen::Index>(f.rank) ||
            v.cols() != static_cast<Eigen::Index>(f.dim))
            throw ParseError("factor at point '" + name + "' must be rank x dim");
        f.factors.push_back(std::move(v));
    }
    return f;
}

inline json realization_to_json(const GaussianRealization& r) {
    json samples = json::array();
    for (const auto& draw : r.samples) {
        json entry = json::object();
        for (std::size_t p = 0; p < r.factor.points.size(); ++p) {
            json vec = json::array();
            for (Eigen::Index i = 0; i < draw[p].size(); ++i)
                vec.push_back(complex_to_json(draw[p](i)));
            entry[r.factor.points[p]] = std::move(vec);
        }
        samples.push_back(std::move(entry));
    }
    return json{{"M", r.sample_count}, {"points", r.factor.points}, {"samples", std::move(samples)}};
}

inline json operator_to_json(const RandomOperator& a) {
    json atoms = json::array();
    for (const auto& atom : a.atoms())
        atoms.push_back(json{{"weight", atom.weight}, {"matrix", matrix_to_json(atom.matrix)}});
    return json{{"dim", a.dim()}, {"atoms", std::move(atoms)}};
}

inline RandomOperator operator_from_json(const json& j) {
    if (!j.is_object() || !j.contains("dim") || !j.contains("atoms") || !j.at("atoms").is_array())
        throw ParseError("operator object needs dim and an atoms array");
    const auto dim = j.at("dim").get<std::int64_t>();
    if (dim < 1) throw ParseError("operator dim must be >= 1");
    std::vector<RandomOperator::Atom> atoms;
    for (const json& a : j.at("atoms")) {
        if (!a.is_object() || !a.contains("weight") || !a.contains("matrix"))
            throw ParseError("operator atom needs weight and matrix");
        atoms.push_back({a.at("weight").get<double>(), matrix_from_json(a.at("matrix"))});
    }
    try {
        return RandomOperator(static_cast<std::size_t>(dim), std::move(atoms));
    } catch (const Error& e) {
        throw ParseError(std::string("invalid operator: ") + e.what());
    }
}

inline json dilation_to_json(const DilationTriple& t) {
    return json{{"space_dim", t.space_dim}, {"rank", t.rank},
                {"trunc_depth", t.trunc_depth}, {"dim", t.dim},
                {"U", matrix_to_json(t.unitary)}, {"P", matrix_to_json(t.projection)},
                {"W", matrix_to_json(t.isometry)}, {"B", matrix_to_json(t.shift)}};
}

inline DilationTriple dilation_from_json(const json& j) {
    for (const char* key : {"space_dim", "rank", "trunc_depth", "dim", "U", "P", "W", "B"})
        if (!j.is_object() || !j.contains(key))
            throw ParseError(std::string("dilation object missing '") + key + "'");
    DilationTriple t;
    t.space_dim = j.at("space_dim").get<std::size_t>();
    t.rank = j.at("rank").get<std::size_t>();
    t.trunc_depth = j.at("trunc_depth").get<std::size_t>();
    t.dim = j.at("dim").get<std::size_t>();
    t.unitary = matrix_from_json(j.at("U"));
    t.projection = matrix_from_json(j.at("P"));
    t.isometry = matrix_from_json(j.at("W"));
    t.shift = matrix_from_json(j.at("B"));
    if (t.unitary.rows() != static_cast<Eigen::Index>(t.space_dim) ||
        t.unitary.cols() != static_cast<Eigen::Index>(t.space_dim) ||
        t.projection.rows() != t.unitary.rows() || t.projection.cols() != t.unitary.cols() ||
        t.isometry.rows() != t.unitary.rows() ||
        t.isometry.cols() != static_cast<Eigen::Index>(t.dim) ||
        t.shift.rows() != static_cast<Eigen::Index>(t.rank) || t.shift.cols() != t.shift.rows())
        throw ParseError("dilation matrices inconsistent with space_dim/rank/dim");
    return t;
}

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string convergence_to_csv(const std::vector<ConvergencePoint>& record) {
    std::ostringstream out;
    out << "m,max_abs_error,stderr_estimate\n";
    for (const auto& cp : record)
        out << cp.m << ',' << format_double(cp.max_abs_error) << ','
            << format_double(cp.stderr_estimate) << '\n';
    return out.str();
}

inline void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ParseError("cannot open '" + tmp.string() + "' for writing");
        out << text;
        if (!out) throw ParseError("failed writing '" + tmp.string() + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw ParseError("failed to move '" + tmp.string() + "' into place: " + ec.message());
}

inline void save_json(const std::filesystem::path& path, const json& j) {
    write_text_atomic(path, j.dump(2) + "\n");
}

inline json load_json_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path.string() + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError("cannot parse '" + path.string() + "': " + e.what());
    }
}

}  // namespace rok
