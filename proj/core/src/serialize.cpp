/*
 * Copyright 2026 The spatialbench Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include "spb/serialize.hpp"

#include <fstream>

#include "spb/error.hpp"

namespace spb {

using nlohmann::json;

namespace {

json vec(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vec_from(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json mat(const DenseMatrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(vec(m.row(i).transpose()));
  return rows;
}

DenseMatrix mat_from(const json& j) {
  const auto r = static_cast<Eigen::Index>(j.size());
  DenseMatrix m(r, r);
  for (Eigen::Index i = 0; i < r; ++i) {
    const auto row = j[static_cast<std::size_t>(i)].get<std::vector<double>>();
    if (static_cast<Eigen::Index>(row.size()) != r) throw DataError("predictor file: K is not square");
    for (Eigen::Index k = 0; k < r; ++k) m(i, k) = row[static_cast<std::size_t>(k)];
  }
  return m;
}

template <class F>
auto guarded(const char* what, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw DataError(std::string("predictor file: bad ") + what + ": " + e.what());
  }
}

}  // namespace

json params_to_json(const TskParams& p) {
  return {{"beta", vec(p.beta)}, {"theta", p.theta}, {"sigma0_sq", p.sigma0_sq},
          {"sigma_xi_sq", p.sigma_xi_sq}};
}
json params_to_json(const FrkParams& p) {
  return {{"beta", vec(p.beta)}, {"K", mat(p.K)}, {"sigma_xi_sq", p.sigma_xi_sq}};
}
json params_to_json(const SspParam& p) { return {{"theta_ssp", p.theta_ssp}}; }
json params_to_json(const LtkParams& p) {
  return {{"beta", vec(p.beta)}, {"sigma_eta_sq", p.sigma_eta_sq}, {"kappa", p.kappa}};
}
json params_to_json(const SpdParams& p) {
  return {{"beta", vec(p.beta)}, {"kappa", p.kappa}, {"sigma_nu_sq", p.sigma_nu_sq},
          {"sigma_eps_sq", p.sigma_eps_sq}};
}
json params_to_json(const MppPriors& p) {
  return {{"a_eta", p.a_eta},     {"b_eta", p.b_eta}, {"a_kappa", p.a_kappa},
          {"b_kappa", p.b_kappa}, {"a_eps", p.a_eps}, {"b_eps", p.b_eps}};
}
json params_to_json(const MppChain& c) {
  json samples = json::array();
  for (const auto& s : c.samples) {
    samples.push_back({{"beta", vec(s.params.beta)},
                       {"kappa", s.params.kappa},
                       {"sigma_nu_sq", s.params.sigma_nu_sq},
                       {"sigma_eps_sq", s.params.sigma_eps_sq},
                       {"eta", vec(s.eta)}});
  }
  return {{"priors", params_to_json(c.priors)},
          {"kappa_acceptance", c.kappa_acceptance},
          {"rhat", {{"kappa", c.rhat_kappa}, {"sigma_nu_sq", c.rhat_sigma_nu_sq},
                    {"sigma_eps_sq", c.rhat_sigma_eps_sq}}},
          {"samples", samples}};
}

TskParams tsk_params_from_json(const json& j) {
  return guarded("TSK parameters", [&] {
    return TskParams{vec_from(j.at("beta")), j.at("theta").get<double>(),
                     j.at("sigma0_sq").get<double>(), j.at("sigma_xi_sq").get<double>()};
  });
}
FrkParams frk_params_from_json(const json& j) {
  return guarded("FRK parameters", [&] {
    return FrkParams{vec_from(j.at("beta")), mat_from(j.at("K")), j.at("sigma_xi_sq").get<double>()};
  });
}
SspParam ssp_param_from_json(const json& j) {
  return guarded("SSP parameter", [&] { return SspParam{j.at("theta_ssp").get<double>()}; });
}
LtkParams ltk_params_from_json(const json& j) {
  return guarded("LTK parameters", [&] {
    return LtkParams{vec_from(j.at("beta")), j.at("sigma_eta_sq").get<double>(),
                     j.at("kappa").get<double>()};
  });
}
SpdParams spd_params_from_json(const json& j) {
  return guarded("SPD parameters", [&] {
    return SpdParams{vec_from(j.at("beta")), j.at("kappa").get<double>(),
                     j.at("sigma_nu_sq").get<double>(), j.at("sigma_eps_sq").get<double>()};
  });
}
MppPriors mpp_priors_from_json(const json& j) {
  return guarded("MPP priors", [&] {
    MppPriors p{j.at("a_eta").get<double>(),   j.at("b_eta").get<double>(),
                j.at("a_kappa").get<double>(), j.at("b_kappa").get<double>(),
                j.at("a_eps").get<double>(),   j.at("b_eps").get<double>()};
    p.validate();
    return p;
  });
}
MppChain mpp_chain_from_json(const json& j) {
  return guarded("MPP chain", [&] {
    MppChain c;
    c.priors = mpp_priors_from_json(j.at("priors"));
    c.kappa_acceptance = j.at("kappa_acceptance").get<double>();
    const json& r = j.at("rhat");
    auto num = [](const json& x) { return x.is_null() ? std::nan("") : x.get<double>(); };
    c.rhat_kappa = num(r.at("kappa"));
    c.rhat_sigma_nu_sq = num(r.at("sigma_nu_sq"));
    c.rhat_sigma_eps_sq = num(r.at("sigma_eps_sq"));
    for (const auto& s : j.at("samples")) {
      MppSample x;
      x.params.beta = vec_from(s.at("beta"));
      x.params.kappa = s.at("kappa").get<double>();
      x.params.sigma_nu_sq = s.at("sigma_nu_sq").get<double>();
      x.params.sigma_eps_sq = s.at("sigma_eps_sq").get<double>();
      x.eta = vec_from(s.at("eta"));
      c.samples.push_back(std::move(x));
    }
    return c;
  });
}

json predictor_to_json(const FittedPredictor& f, const std::string& training_path) {
  return {{"format", kPredictorFormat},
          {"version", kPredictorVersion},
          {"method", to_string(f.method())},
          {"trend", f.trend().names()},
          {"training_data",
           {{"path", training_path},
            {"n", f.training().size()},
            {"hash", hex64(f.training().content_hash())}}},
          {"params", f.params_json()},
          {"basis", f.basis_json()},
          {"fit_log",
           {{"converged", f.log().converged},
            {"iterations", f.log().iterations},
            {"initial_objective", f.log().initial_objective},
            {"final_objective", f.log().final_objective},
            {"warnings", f.log().warnings},
            {"details", f.log().details}}}};
}

std::unique_ptr<FittedPredictor> predictor_from_json(const json& j, const SpatialDataset& training) {
  if (!j.is_object() || j.value("format", "") != kPredictorFormat)
    throw DataError("not a fitted-predictor document");
  if (j.value("version", 0) != kPredictorVersion)
    throw DataError("unsupported fitted-predictor version " + j.value("version", json(0)).dump());
  const Method m = parse_method(j.at("method").get<std::string>());
  const TrendSpec trend = TrendSpec::from_names(j.at("trend").get<std::vector<std::string>>());
  const std::string want = j.at("training_data").at("hash").get<std::string>();
  if (hex64(training.content_hash()) != want)
    throw DataError("training data hash mismatch: the referenced CSV changed since fitting");
  const json& p = j.at("params");
  const json& b = j.at("basis");
  auto basis_as = [&](const char* kind) {
    if (!b.is_object() || b.value("kind", "") != kind)
      throw DataError(std::string("predictor file: expected a ") + kind + " basis");
    return basis_from_json(b);
  };
  std::unique_ptr<FittedPredictor> out;
  switch (m) {
    case Method::TSK:
      out = make_tsk(training, trend, tsk_params_from_json(p), p.at("sigma_eps_sq").get<double>());
      break;
    case Method::SSP:
      out = make_ssp(training, trend, ssp_param_from_json(p));
      break;
    case Method::EDW:
      out = make_edw(training, p.at("theta_edw").get<double>());
      break;
    case Method::FRK: {
      const auto basis = basis_as("bisquare");
      out = make_frk(training, trend, dynamic_cast<const BisquareBasis&>(*basis),
                     frk_params_from_json(p), p.at("sigma_eps_sq").get<double>());
      break;
    }
    case Method::LTK: {
      const auto basis = basis_as("wendland");
      out = make_ltk(training, trend, dynamic_cast<const WendlandBasis&>(*basis),
                     ltk_params_from_json(p), p.at("sigma_eps_sq").get<double>());
      break;
    }
    case Method::SPD: {
      const auto basis = basis_as("piecewise_linear");
      out = make_spd(training, trend, dynamic_cast<const PiecewiseLinearBasis&>(*basis),
                     spd_params_from_json(p));
      break;
    }
    case Method::MPP: {
      if (!b.is_object() || b.value("kind", "") != "knots")
        throw DataError("predictor file: expected MPP knots");
      std::vector<Location> knots;
      for (const auto& k : b.at("knots")) knots.push_back({k.at(0).get<double>(), k.at(1).get<double>()});
      out = make_mpp(training, trend, std::move(knots), mpp_chain_from_json(p),
                     p.at("seed").get<std::uint64_t>(), p.at("max_prediction_draws").get<int>());
      break;
    }
  }
  if (j.contains("fit_log")) {
    const json& l = j.at("fit_log");
    FitLog& log = out->mutable_log();
    log.converged = l.value("converged", true);
    log.iterations = l.value("iterations", 0);
    log.initial_objective = l.value("initial_objective", 0.0);
    log.final_objective = l.value("final_objective", 0.0);
    log.warnings = l.value("warnings", std::vector<std::string>{});
    log.details = l.value("details", json::object());
  }
  return out;
}

void save_predictor(const FittedPredictor& f, const std::string& path,
                    const std::string& training_path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write predictor file '" + path + "'");
  out << predictor_to_json(f, training_path).dump(1) << "\n";
  if (!out) throw DataError("failed writing predictor file '" + path + "'");
}

std::unique_ptr<FittedPredictor> load_predictor(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open predictor file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError("predictor file '" + path + "': " + e.what());
  }
  const std::string training_path = guarded("training_data", [&] {
    return j.at("training_data").at("path").get<std::string>();
  });
  return predictor_from_json(j, load_csv(training_path));
}

}  // namespace spb
