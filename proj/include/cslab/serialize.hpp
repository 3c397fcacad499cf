#ifndef CSLAB_SERIALIZE_HPP
#define CSLAB_SERIALIZE_HPP

#include <complex>
#include <nlohmann/json.hpp>
#include <string>
#include <variant>

#include "cslab/certifier.hpp"
#include "cslab/ensemble.hpp"
#include "cslab/errors.hpp"

namespace cslab {

using json = nlohmann::json;

namespace detail {

inline json scalar_to_json(double v) { return v; }
inline json scalar_to_json(const std::complex<double>& v) {
  return json::array({v.real(), v.imag()});
}

inline void scalar_from_json(const json& j, double& out) {
  if (!j.is_number()) throw InvalidArgs("expected real number entry");
  out = j.get<double>();
}
inline void scalar_from_json(const json& j, std::complex<double>& out) {
  if (j.is_number()) { out = {j.get<double>(), 0.0}; return; }
  if (!j.is_array() || j.size() != 2)
    throw InvalidArgs("expected [re, im] pair");
  out = {j[0].get<double>(), j[1].get<double>()};
}

template <class Scalar> const char* field_name();
template <> inline const char* field_name<double>() { return "real"; }
template <> inline const char* field_name<std::complex<double>>() {
  return "complex";
}

} // namespace detail

template <class Scalar>
json to_json(const EnsembleSpec<Scalar>& spec) {
  json j;
  j["field"] = detail::field_name<Scalar>();
  j["n"] = spec.dimension();
  j["scale"] = spec.scale();
  if (spec.kind() == EnsembleSpec<Scalar>::Kind::FiniteSupport) {
    j["kind"] = "finite_support";
    json atoms = json::array();
    for (std::size_t k = 0; k < spec.atoms().size(); ++k) {
      json vec = json::array();
      for (Eigen::Index i = 0; i < spec.atoms()[k].size(); ++i)
        vec.push_back(detail::scalar_to_json(spec.atoms()[k](i)));
      atoms.push_back({{"vector", vec}, {"prob", spec.probs()[k]}});
    }
    j["atoms"] = atoms;
  } else {
    j["kind"] = "signed_transform";
    json rows = json::array();
    for (Eigen::Index r = 0; r < spec.transform().rows(); ++r) {
      json row = json::array();
      for (Eigen::Index c = 0; c < spec.transform().cols(); ++c)
        row.push_back(detail::scalar_to_json(spec.transform()(r, c)));
      rows.push_back(row);
    }
    j["matrix"] = rows;
  }
  return j;
}

template <class Scalar>
EnsembleSpec<Scalar> ensemble_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  const int n = j.at("n").get<int>();
  const double scale = j.value("scale", 1.0);
  if (kind == "finite_support") {
    std::vector<Vec<Scalar>> atoms;
    std::vector<double> probs;
    for (const auto& atom : j.at("atoms")) {
      const auto& vec = atom.at("vector");
      if (int(vec.size()) != n) throw InvalidArgs("atom length != n");
      Vec<Scalar> a(n);
      for (int i = 0; i < n; ++i) detail::scalar_from_json(vec[i], a(i));
      atoms.push_back(std::move(a));
      probs.push_back(atom.at("prob").get<double>());
    }
    return EnsembleSpec<Scalar>::finite_support(std::move(atoms),
                                                std::move(probs), scale);
  }
  if (kind == "signed_transform") {
    const auto& rows = j.at("matrix");
    if (int(rows.size()) != n) throw InvalidArgs("matrix row count != n");
    Mat<Scalar> m(n, n);
    for (int r = 0; r < n; ++r) {
      if (int(rows[r].size()) != n) throw InvalidArgs("matrix not square");
      for (int c = 0; c < n; ++c)
        detail::scalar_from_json(rows[r][c], m(r, c));
    }
    return EnsembleSpec<Scalar>::signed_transform(std::move(m), scale);
  }
  throw InvalidArgs("unknown ensemble kind: " + kind);
}

using EnsembleSpecVariant =
    std::variant<EnsembleSpec<double>, EnsembleSpec<std::complex<double>>>;

inline EnsembleSpecVariant ensemble_variant_from_json(const json& j) {
  const std::string field = j.value("field", "real");
  if (field == "real") return ensemble_from_json<double>(j);
  if (field == "complex")
    return ensemble_from_json<std::complex<double>>(j);
  throw InvalidArgs("unknown field: " + field);
}

template <class Scalar>
json to_json(const CertificateResult<Scalar>& res,
             bool include_vectors = false) {
  json j;
  j["success"] = res.success;
  j["failure_reason"] = to_string(res.failure_reason);
  j["q_norms"] = res.q_norms;
  j["repetitions"] = res.r;
  j["total_samples"] = res.total_samples;
  j["report"] = {
      {"inv_op_norm", res.report.inv_op_norm},
      {"max_offsupport", res.report.max_offsupport},
      {"on_support_gap", res.report.on_support_gap},
      {"offsupport_inf", res.report.offsupport_inf},
      {"rowspace_residual", res.report.rowspace_residual},
      {"singular_on_support", res.report.singular_on_support},
      {"ass1", res.report.ass1},
      {"ass2", res.report.ass2},
      {"dual1", res.report.dual1},
      {"dual2", res.report.dual2},
      {"pass", res.report.pass},
  };
  if (include_vectors && res.v.size() > 0) {
    json v = json::array();
    for (Eigen::Index i = 0; i < res.v.size(); ++i)
      v.push_back(detail::scalar_to_json(res.v(i)));
    j["v"] = v;
    json coeffs = json::array();
    for (const auto& c : res.row_coeffs)
      coeffs.push_back(detail::scalar_to_json(c));
    j["row_coeffs"] = coeffs;
  }
  return j;
}

} // namespace cslab

#endif
