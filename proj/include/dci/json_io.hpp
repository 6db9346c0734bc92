#pragma once

#include <dci/tn.hpp>

#include <json.hpp>

namespace dci {

using Json = nlohmann::json;

inline Json to_json(const RMat& m) {
    Json rows = Json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(to_string(m(i, j)));
        rows.push_back(row);
    }
    return rows;
}

inline Json to_json(const FMat& m) {
    Json rows = Json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

inline RMat rmat_from_json(const Json& j) {
    std::size_t rows = j.size(), cols = rows ? j.at(0).size() : 0;
    RMat m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t jj = 0; jj < cols; ++jj) {
            const auto& e = j.at(i).at(jj);
            if (e.is_string()) m(i, jj) = rational_from_string(e.get<std::string>());
            else if (e.is_number_integer()) m(i, jj) = Rational(e.get<long>());
            else throw std::invalid_argument("exact matrices need integer or \"p/q\" entries");
        }
    return m;
}

inline FMat fmat_from_json(const Json& j) {
    std::size_t rows = j.size(), cols = rows ? j.at(0).size() : 0;
    FMat m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t jj = 0; jj < cols; ++jj) {
            const auto& e = j.at(i).at(jj);
            if (e.is_string()) m(i, jj) = to_double(rational_from_string(e.get<std::string>()));
            else m(i, jj) = e.get<double>();
        }
    return m;
}

/// Witness schema: {N, n, m, P, C: [...], k: [...]} with optional stacked
/// fields {Q, R, D: [...], E: [...], n_dir: [...]}.
template <typename S>
Json config_to_json(const TnPrimeConfig<S>& cfg) {
    Json j;
    j["N"] = cfg.count();
    j["n"] = cfg.x.nrows();
    j["m"] = cfg.x.ncols();
    j["P"] = to_json(cfg.x.p);
    j["C"] = Json::array();
    for (const auto& c : cfg.x.c) j["C"].push_back(to_json(c));
    j["k"] = Json::array();
    for (const auto& k : cfg.x.k) {
        if constexpr (std::is_same_v<S, Rational>) j["k"].push_back(to_string(k));
        else j["k"].push_back(k);
    }
    j["Q"] = to_json(cfg.q);
    j["R"] = to_json(cfg.r);
    j["D"] = Json::array();
    for (const auto& d : cfg.d) j["D"].push_back(to_json(d));
    j["E"] = Json::array();
    for (const auto& e : cfg.e) j["E"].push_back(to_json(e));
    j["n_dir"] = Json::array();
    for (const auto& nd : cfg.n_dir) {
        Json v = Json::array();
        for (const auto& x : nd) {
            if constexpr (std::is_same_v<S, Rational>) v.push_back(to_string(x));
            else v.push_back(x);
        }
        j["n_dir"].push_back(v);
    }
    return j;
}

} // namespace dci
