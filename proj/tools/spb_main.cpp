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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "spb/compare.hpp"
#include "spb/config.hpp"
#include "spb/error.hpp"
#include "spb/evaluation.hpp"
#include "spb/metering.hpp"
#include "spb/parallel.hpp"
#include "spb/predictors.hpp"
#include "spb/serialize.hpp"
#include "spb/simulate.hpp"

namespace fs = std::filesystem;

namespace {

struct Flags {
  std::string config;
  std::string methods;
  std::optional<std::uint64_t> seed;
  std::optional<double> split_fraction;
  std::string raster;
  std::string pmcc_sign;
  std::string out;
  std::string data;
  std::string validation;
  std::string model;
  std::string locations;
};

spb::RunConfig resolve(const Flags& f) {
  spb::RunConfig c = f.config.empty() ? spb::RunConfig{} : spb::load_run_config(f.config);
  if (!f.methods.empty()) c.methods = spb::parse_method_list(f.methods);
  if (f.seed) {
    c.seed = *f.seed;
    c.simulation.seed = *f.seed;
    c.fit.mpp.chain.seed = *f.seed;
  }
  if (f.split_fraction) c.split_fraction = *f.split_fraction;
  if (!f.raster.empty()) c.raster = spb::RasterSpec::parse(f.raster);
  if (!f.pmcc_sign.empty()) c.pmcc_sign = spb::parse_pmcc_sign(f.pmcc_sign);
  if (!f.out.empty()) c.out = f.out;
  if (!f.data.empty()) c.data = f.data;
  if (!f.validation.empty()) c.validation = f.validation;
  if (!f.model.empty()) c.model = f.model;
  if (!f.locations.empty()) c.locations = f.locations;
  c.validate();
  return c;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  if (!out) throw spb::DataError("cannot write '" + p.string() + "'");
  out << text;
  if (!out) throw spb::DataError("failed writing '" + p.string() + "'");
}

fs::path out_dir(const spb::RunConfig& c) {
  fs::path d(c.out);
  std::error_code ec;
  fs::create_directories(d, ec);
  if (ec) throw spb::DataError("cannot create output directory '" + c.out + "': " + ec.message());
  return d;
}

void write_predictions(const fs::path& p, std::span<const spb::Location> u,
                       const spb::PredictionResult& r) {
  std::ofstream out(p);
  if (!out) throw spb::DataError("cannot write '" + p.string() + "'");
  out << (r.variance ? "lon,lat,mean,variance\n" : "lon,lat,mean\n");
  char buf[128];
  for (std::size_t k = 0; k < u.size(); ++k) {
    if (r.variance)
      std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.10g,%.10g\n", u[k].lon, u[k].lat, r.mean[k],
                    (*r.variance)[k]);
    else
      std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.10g\n", u[k].lon, u[k].lat, r.mean[k]);
    out << buf;
  }
}

int cmd_simulate(const Flags& f) {
  const spb::RunConfig c = resolve(f);
  const fs::path dir = out_dir(c);
  const spb::SpatialDataset data = spb::simulate(c.simulation);
  spb::save_csv((dir / "data.csv").string(), data);
  nlohmann::json truth = c.simulation;
  truth["method"] = spb::to_string(spb::simulation_method_for(c.simulation));
  write_text(dir / "truth.json", truth.dump(2) + "\n");
  std::cout << "wrote " << (dir / "data.csv").string() << " (" << data.size() << " points)\n";
  if (f.split_fraction) {
    const spb::HoldoutSplit s = spb::split_holdout(data, c.split_fraction, c.seed);
    spb::save_csv((dir / "train.csv").string(), s.train);
    spb::save_csv((dir / "validation.csv").string(), s.validation);
    std::cout << "split: " << s.train.size() << " train / " << s.validation.size()
              << " validation\n";
  }
  return 0;
}

int cmd_fit(const Flags& f) {
  const spb::RunConfig c = resolve(f);
  if (c.data.empty()) throw spb::ConfigError("fit needs training data (--data or config 'data')");
  if (c.methods.size() != 1) throw spb::ConfigError("fit takes exactly one --method");
  const spb::Method m = c.methods.front();
  const fs::path dir = out_dir(c);
  const spb::SpatialDataset train = spb::load_csv(c.data);
  const auto f_ = spb::fit(m, train, c.fit);
  const std::string tag = spb::to_string(m);
  const fs::path model = dir / ("model_" + tag + ".json");
  spb::save_predictor(*f_, model.string(), fs::absolute(c.data).string());
  const nlohmann::json log = {{"method", tag},
                              {"converged", f_->log().converged},
                              {"iterations", f_->log().iterations},
                              {"initial_objective", f_->log().initial_objective},
                              {"final_objective", f_->log().final_objective},
                              {"warnings", f_->log().warnings},
                              {"details", f_->log().details}};
  write_text(dir / ("fit_log_" + tag + ".json"), log.dump(2) + "\n");
  for (const auto& w : f_->log().warnings) std::cerr << "warning: " << w << "\n";
  std::cout << "wrote " << model.string() << "\n";
  return 0;
}

int cmd_predict(const Flags& f) {
  const spb::RunConfig c = resolve(f);
  if (c.model.empty()) throw spb::ConfigError("predict needs a model file (--model)");
  if (!fs::exists(c.model)) throw spb::DataError("model file '" + c.model + "' not found");
  const auto model = spb::load_predictor(c.model);
  const fs::path dir = out_dir(c);
  const bool var = spb::has_variance(model->method());
  if (!c.locations.empty()) {
    const std::vector<spb::Location> u = spb::load_locations_csv(c.locations);
    write_predictions(dir / "predictions.csv", u, model->predict(u, var));
    std::cout << "wrote " << (dir / "predictions.csv").string() << " (" << u.size() << " rows)\n";
  }
  if (c.raster) {
    const std::vector<spb::Location> g = c.raster->locations();
    write_predictions(dir / "raster.csv", g, model->predict(g, var));
    std::cout << "wrote " << (dir / "raster.csv").string() << " (" << c.raster->nx() << "x"
              << c.raster->ny() << ")\n";
  }
  if (c.locations.empty() && !c.raster)
    throw spb::ConfigError("predict needs --locations and/or --raster");
  return 0;
}

int cmd_compare(const Flags& f) {
  const spb::RunConfig c = resolve(f);
  const fs::path dir = out_dir(c);
  spb::HoldoutSplit split;
  spb::SpatialDataset all;
  if (c.data.empty()) {
    all = spb::simulate(c.simulation);
    split = spb::split_holdout(all, c.split_fraction, c.seed);
  } else if (!c.validation.empty()) {
    split.train = spb::load_csv(c.data);
    split.validation = spb::load_csv(c.validation);
    split.seed = c.seed;
  } else {
    all = spb::load_csv(c.data);
    split = spb::split_holdout(all, c.split_fraction, c.seed);
  }
  spb::CompareOptions opt;
  opt.methods = c.methods;
  opt.fit = c.fit;
  opt.raster = c.raster;
  opt.raster_step = c.raster_step;
  opt.lag_unit = c.lag_unit;
  opt.lag_tol = c.lag_tol;
  opt.pmcc_sign = c.pmcc_sign;
  opt.config = c;
  opt.config["threads"] = spb::thread_budget();
  const spb::ComparisonReport rep = spb::compare(split, opt);
  write_text(dir / "report.csv", rep.to_csv());
  write_text(dir / "report.json", rep.to_json().dump(2) + "\n");
  std::cout << rep.to_csv();
  for (const auto& r : rep.rows)
    if (r.failed) std::cerr << spb::to_string(r.method) << " failed: " << r.error << "\n";
  return 0;
}

int cmd_show_defaults() {
  const nlohmann::json j = spb::RunConfig{};
  std::cout << j.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spb: spatial prediction benchmark"};
  app.require_subcommand(1);
  Flags f;

  auto add_common = [&](CLI::App* s) {
    s->add_option("--config", f.config, "JSON run configuration")->check(CLI::ExistingFile);
    s->add_option("--method", f.methods, "Method tag(s): TSK,SSP,EDW,FRK,MPP,SPD,LTK or all");
    s->add_option("--seed", f.seed, "Seed for simulation, split and MCMC");
    s->add_option("--split-fraction", f.split_fraction, "Validation fraction in (0,1)");
    s->add_option("--raster", f.raster, "Raster \"lon0,lat0,lon1,lat1,step\"");
    s->add_option("--pmcc-sign", f.pmcc_sign, "paper|score")
        ->check(CLI::IsMember({"paper", "score"}));
    s->add_option("--out", f.out, "Output directory");
    s->add_option("--data", f.data, "Input CSV (lon,lat,value[,weight])");
  };

  auto* sim = app.add_subcommand("simulate", "Simulate a dataset from the mixed-effects model");
  add_common(sim);
  auto* fit = app.add_subcommand("fit", "Fit one predictor and write its model file");
  add_common(fit);
  auto* pred = app.add_subcommand("predict", "Predict from a model file");
  add_common(pred);
  pred->add_option("--model", f.model, "Fitted predictor JSON");
  pred->add_option("--locations", f.locations, "CSV of lon,lat prediction locations");
  auto* cmp = app.add_subcommand("compare", "Run the hold-out comparison");
  add_common(cmp);
  cmp->add_option("--validation", f.validation, "Explicit validation CSV (skips the split)");
  auto* defs = app.add_subcommand("show-defaults", "Print every default setting");

  CLI11_PARSE(app, argc, argv);
  try {
    (void)spb::thread_budget();
    if (sim->parsed()) return cmd_simulate(f);
    if (fit->parsed()) return cmd_fit(f);
    if (pred->parsed()) return cmd_predict(f);
    if (cmp->parsed()) return cmd_compare(f);
    if (defs->parsed()) return cmd_show_defaults();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
