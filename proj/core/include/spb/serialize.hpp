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

#pragma once

#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "spb/estimation.hpp"
#include "spb/predictors.hpp"

namespace spb {

inline constexpr const char* kPredictorFormat = "spb-fitted-predictor";
inline constexpr int kPredictorVersion = 1;

nlohmann::json params_to_json(const TskParams& p);
nlohmann::json params_to_json(const FrkParams& p);
nlohmann::json params_to_json(const SspParam& p);
nlohmann::json params_to_json(const LtkParams& p);
nlohmann::json params_to_json(const SpdParams& p);
nlohmann::json params_to_json(const MppPriors& p);
nlohmann::json params_to_json(const MppChain& c);

TskParams tsk_params_from_json(const nlohmann::json& j);
FrkParams frk_params_from_json(const nlohmann::json& j);
SspParam ssp_param_from_json(const nlohmann::json& j);
LtkParams ltk_params_from_json(const nlohmann::json& j);
SpdParams spd_params_from_json(const nlohmann::json& j);
MppPriors mpp_priors_from_json(const nlohmann::json& j);
MppChain mpp_chain_from_json(const nlohmann::json& j);

// The versioned predictor document. Factorizations are not stored; they are
// rebuilt from the parameters and the referenced training data on load.
nlohmann::json predictor_to_json(const FittedPredictor& f, const std::string& training_path);
std::unique_ptr<FittedPredictor> predictor_from_json(const nlohmann::json& j,
                                                     const SpatialDataset& training);

void save_predictor(const FittedPredictor& f, const std::string& path,
                    const std::string& training_path);
// Loads the training CSV named in the document and checks its content hash.
std::unique_ptr<FittedPredictor> load_predictor(const std::string& path);

}  // namespace spb
