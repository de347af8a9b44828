#include "povmforge/serialize.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace povmforge {

using nlohmann::json;

namespace {

json ket_to_json(const Ket& k) {
    json out = json::array();
    for (Eigen::Index i = 0; i < k.size(); ++i)
        out.push_back({k(i).real(), k(i).imag()});
    return out;
}

Ket ket_from_json(const json& j) {
    Ket k(j.size());
    for (size_t i = 0; i < j.size(); ++i)
        k(static_cast<Eigen::Index>(i)) = Cplx(j[i].at(0).get<double>(), j[i].at(1).get<double>());
    return k;
}

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            row.push_back({m(r, c).real(), m(r, c).imag()});
        rows.push_back(row);
    }
    return rows;
}

Matrix matrix_from_json(const json& j) {
    const auto rows = j.size();
    if (rows == 0) return Matrix(0, 0);
    const auto cols = j[0].size();
    Matrix m(rows, cols);
    for (size_t r = 0; r < rows; ++r)
        for (size_t c = 0; c < cols; ++c)
            m(r, c) = Cplx(j[r][c].at(0).get<double>(), j[r][c].at(1).get<double>());
    return m;
}

}  // namespace

std::string povm_to_json(const Povm& p) {
    json out;
    out["dim"] = p.dim();
    if (p.is_rank1_form()) {
        json elems = json::array();
        for (const auto& e : p.rank1_elements())
            elems.push_back({{"weight", e.weight}, {"ket", ket_to_json(e.ket)}});
        out["elements"] = elems;
    } else {
        json mats = json::array();
        for (const auto& m : p.matrices()) mats.push_back(matrix_to_json(m));
        out["matrices"] = mats;
    }
    return out.dump(2);
}

Povm povm_from_json(const std::string& text) {
    json j = json::parse(text);
    const int dim = j.at("dim").get<int>();
    if (j.contains("elements")) {
        std::vector<Rank1Element> elems;
        for (const auto& e : j.at("elements"))
            elems.push_back({e.at("weight").get<double>(), ket_from_json(e.at("ket"))});
        return Povm::from_rank1(dim, std::move(elems));
    }
    std::vector<Matrix> mats;
    for (const auto& m : j.at("matrices")) mats.push_back(matrix_from_json(m));
    return Povm::from_matrices(dim, std::move(mats));
}

std::string state_set_to_json(const StateSet& s) {
    json out;
    out["dim"] = s.dim;
    json states = json::array();
    for (const auto& k : s.states) states.push_back(ket_to_json(k));
    out["states"] = states;
    return out.dump(2);
}

StateSet state_set_from_json(const std::string& text) {
    json j = json::parse(text);
    StateSet s;
    s.dim = j.at("dim").get<int>();
    for (const auto& k : j.at("states")) s.states.push_back(ket_from_json(k));
    return s;
}

std::string program_to_json(const CircuitProgram& prog) {
    json out;
    out["dim"] = prog.dim;
    out["n_outcomes"] = prog.n_outcomes;
    json modules = json::array();
    for (const auto& mod : prog.modules) {
        json settings = json::array();
        for (const auto& s : mod)
            settings.push_back({{"alpha", s.alpha}, {"beta", s.beta}});
        modules.push_back(settings);
    }
    out["modules"] = modules;
    return out.dump(2);
}

CircuitProgram program_from_json(const std::string& text) {
    json j = json::parse(text);
    CircuitProgram prog;
    prog.dim = j.at("dim").get<int>();
    prog.n_outcomes = j.at("n_outcomes").get<int>();
    for (const auto& mod : j.at("modules")) {
        std::vector<MziSetting> settings;
        for (const auto& s : mod)
            settings.push_back({s.at("alpha").get<double>(), s.at("beta").get<double>()});
        prog.modules.push_back(std::move(settings));
    }
    return prog;
}

std::string count_table_to_json(const CountTable& t) {
    json out;
    out["outcomes"] = t.n_outcomes;
    out["probes"] = t.n_probes;
    json rows = json::array();
    for (int i = 0; i < t.n_outcomes; ++i) {
        json row = json::array();
        for (int jdx = 0; jdx < t.n_probes; ++jdx) row.push_back(t.rows(i, jdx));
        rows.push_back(row);
    }
    out["rows"] = rows;
    return out.dump(2);
}

CountTable count_table_from_json(const std::string& text) {
    json j = json::parse(text);
    CountTable t(j.at("outcomes").get<int>(), j.at("probes").get<int>());
    const auto& rows = j.at("rows");
    for (int i = 0; i < t.n_outcomes; ++i)
        for (int jdx = 0; jdx < t.n_probes; ++jdx)
            t.rows(i, jdx) = rows.at(i).at(jdx).get<double>();
    return t;
}

std::string phase_error_to_json(const PhaseError& e) {
    json out = json::object();
    for (const auto& [key, v] : e.deviations) {
        const auto& [mod, mzi, shifter] = key;
        std::ostringstream os;
        os << mod << "." << mzi << "."
           << (shifter == PhaseError::Shifter::Alpha ? "alpha" : "beta");
        out[os.str()] = v;
    }
    return out.dump(2);
}

PhaseError phase_error_from_json(const std::string& text) {
    json j = json::parse(text);
    PhaseError e;
    for (const auto& [key, v] : j.items()) {
        std::istringstream is(key);
        int mod, mzi;
        char dot;
        std::string shifter;
        is >> mod >> dot >> mzi >> dot;
        std::getline(is, shifter);
        e.set(mod, mzi,
              shifter == "alpha" ? PhaseError::Shifter::Alpha : PhaseError::Shifter::Beta,
              v.get<double>());
    }
    return e;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << content;
}

}  // namespace povmforge
