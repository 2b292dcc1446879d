//
// Copyright 2026 The Scorelab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef SCORELAB_REPORT_H_
#define SCORELAB_REPORT_H_

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "scorelab/attacks.h"
#include "scorelab/defense.h"
#include "scorelab/experiment.h"

namespace scorelab {

// Defense JSON:
//   {"kind": "none" | "privee-dp" | "privee-dp++" | "round" | "gaussian-dp"
//            | "monotone-encode",
//    "epsilon", "delta", "sensitivity", "transform", "sampling",
//    "epsilon_min", "epsilon_max", "digits", "key"}
// Only the keys relevant to `kind` are written; missing keys take defaults.
nlohmann::json DefenseToJson(const DefenseKind& kind);
DefenseKind DefenseFromJson(const nlohmann::json& j);

// Nested experiment config. Unknown keys are rejected so typos surface.
nlohmann::json ConfigToJson(const ExperimentConfig& config);
ExperimentConfig ConfigFromJson(const nlohmann::json& j);

nlohmann::json RecordToJson(const ExperimentRecord& record);
ExperimentRecord RecordFromJson(const nlohmann::json& j);

nlohmann::json AttackReportToJson(const AttackReport& report);

// One row per record. Columns follow the ablation tables:
// defense,attack,epsilon,n_parties,attack_strength,mse_without,mse_with,
// random_guess_mse,delta_accuracy,final_accuracy,accuracy_without,
// budget_exceeded,defense_seconds_per_call,seed
void WriteRecordsCsv(std::ostream& out, std::span<const ExperimentRecord> records);

struct ChartSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

// Static SVG line chart; log-scaled axes when requested (values must then be
// positive).
std::string RenderSvgChart(const std::string& title, const std::string& x_label,
                           const std::string& y_label,
                           std::span<const ChartSeries> series, bool log_x,
                           bool log_y);

}  // namespace scorelab

#endif  // SCORELAB_REPORT_H_
