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

#include "scorelab/report.h"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <initializer_list>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace scorelab {

using nlohmann::json;

namespace {

void CheckKeys(const json& j, const char* where,
               std::initializer_list<const char*> allowed) {
  if (!j.is_object()) {
    throw std::invalid_argument(std::string(where) + ": expected an object");
  }
  for (const auto& [key, value] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(),
                     [&](const char* a) { return key == a; })) {
      throw std::invalid_argument(std::string(where) + ": unknown key '" + key + "'");
    }
  }
}

template <class T>
void Read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

std::string SamplingName(SamplingMode m) {
  return m == SamplingMode::kMidpoint ? "midpoint" : "random";
}

SamplingMode ParseSampling(const std::string& s) {
  if (s == "random") return SamplingMode::kRandom;
  if (s == "midpoint") return SamplingMode::kMidpoint;
  throw std::invalid_argument("unknown sampling mode: " + s);
}

}  // namespace

json DefenseToJson(const DefenseKind& kind) {
  json j;
  if (std::holds_alternative<defense::None>(kind)) {
    j["kind"] = "none";
  } else if (const auto* d = std::get_if<defense::PriveeDp>(&kind)) {
    j = {{"kind", "privee-dp"},
         {"epsilon", d->budget.epsilon},
         {"delta", d->budget.delta},
         {"sensitivity", d->budget.sensitivity},
         {"transform", TransformKindName(d->kind)},
         {"sampling", SamplingName(d->sampling)}};
  } else if (const auto* d = std::get_if<defense::PriveeDpPlusPlus>(&kind)) {
    j = {{"kind", "privee-dp++"},
         {"epsilon_min", d->epsilon_min},
         {"epsilon_max", d->epsilon_max},
         {"delta", d->delta},
         {"sensitivity", d->sensitivity},
         {"transform", TransformKindName(d->kind)},
         {"sampling", SamplingName(d->sampling)}};
  } else if (const auto* d = std::get_if<defense::Round>(&kind)) {
    j = {{"kind", "round"}, {"digits", d->digits}};
  } else if (const auto* d = std::get_if<defense::GaussianDp>(&kind)) {
    j = {{"kind", "gaussian-dp"},
         {"epsilon", d->budget.epsilon},
         {"delta", d->budget.delta},
         {"sensitivity", d->budget.sensitivity}};
  } else if (const auto* d = std::get_if<defense::MonotoneEncode>(&kind)) {
    j = {{"kind", "monotone-encode"}, {"key", d->key}};
  }
  return j;
}

DefenseKind DefenseFromJson(const json& j) {
  CheckKeys(j, "defense",
            {"kind", "epsilon", "delta", "sensitivity", "transform", "sampling",
             "epsilon_min", "epsilon_max", "digits", "key"});
  const std::string kind = j.value("kind", std::string("privee-dp"));
  std::string transform = "identity";
  std::string sampling = "random";
  Read(j, "transform", transform);
  Read(j, "sampling", sampling);
  DefenseKind out;
  if (kind == "none") {
    out = defense::None{};
  } else if (kind == "privee-dp") {
    defense::PriveeDp d;
    Read(j, "epsilon", d.budget.epsilon);
    Read(j, "delta", d.budget.delta);
    Read(j, "sensitivity", d.budget.sensitivity);
    d.kind = ParseTransformKind(transform);
    d.sampling = ParseSampling(sampling);
    out = d;
  } else if (kind == "privee-dp++") {
    defense::PriveeDpPlusPlus d;
    Read(j, "epsilon_min", d.epsilon_min);
    Read(j, "epsilon_max", d.epsilon_max);
    Read(j, "delta", d.delta);
    Read(j, "sensitivity", d.sensitivity);
    d.kind = ParseTransformKind(transform);
    d.sampling = ParseSampling(sampling);
    out = d;
  } else if (kind == "round") {
    defense::Round d;
    Read(j, "digits", d.digits);
    out = d;
  } else if (kind == "gaussian-dp") {
    defense::GaussianDp d;
    Read(j, "epsilon", d.budget.epsilon);
    Read(j, "delta", d.budget.delta);
    Read(j, "sensitivity", d.budget.sensitivity);
    out = d;
  } else if (kind == "monotone-encode") {
    defense::MonotoneEncode d;
    Read(j, "key", d.key);
    out = d;
  } else {
    throw std::invalid_argument("unknown defense kind: " + kind);
  }
  ValidateDefense(out);
  return out;
}

json ConfigToJson(const ExperimentConfig& c) {
  return {
      {"data",
       {{"csv", c.csv_path},
        {"classes", c.synthetic.classes},
        {"dims", c.synthetic.dims},
        {"samples", c.synthetic.samples},
        {"margin", c.synthetic.margin},
        {"seed", c.synthetic.seed},
        {"test_fraction", c.test_fraction}}},
      {"model",
       {{"kind", c.model.head == HeadKind::kSumLogits ? "lr" : "nn"},
        {"hidden_units", c.model.hidden_units},
        {"embedding_dim", c.model.embedding_dim},
        {"epochs", c.train.epochs},
        {"batch_size", c.train.batch_size},
        {"learning_rate", c.train.learning_rate}}},
      {"federation", {{"parties", c.n_parties}, {"attack_strength", c.attack_strength}}},
      {"defense", DefenseToJson(c.defense)},
      {"attack",
       {{"kind", AttackName(c.attack)},
        {"samples", c.attack_samples},
        {"gia",
         {{"step_size", c.gia.step_size},
          {"max_iters", c.gia.max_iters},
          {"tolerance", c.gia.tolerance},
          {"clamp_lo", c.gia.clamp_lo},
          {"clamp_hi", c.gia.clamp_hi},
          {"restarts", c.gia.restarts}}},
        {"grn",
         {{"hidden_units", c.grn.hidden_units},
          {"epochs", c.grn.epochs},
          {"batch_size", c.grn.batch_size},
          {"step_size", c.grn.step_size},
          {"clip_norm", c.grn.clip_norm}}}}},
      {"seed", c.seed},
      {"output", c.output_path},
  };
}

ExperimentConfig ConfigFromJson(const json& j) {
  CheckKeys(j, "config", {"data", "model", "federation", "defense", "attack", "seed", "output"});
  ExperimentConfig c;
  if (j.contains("data")) {
    const json& d = j.at("data");
    CheckKeys(d, "data", {"csv", "classes", "dims", "samples", "margin", "seed", "test_fraction"});
    Read(d, "csv", c.csv_path);
    Read(d, "classes", c.synthetic.classes);
    Read(d, "dims", c.synthetic.dims);
    Read(d, "samples", c.synthetic.samples);
    Read(d, "margin", c.synthetic.margin);
    Read(d, "seed", c.synthetic.seed);
    Read(d, "test_fraction", c.test_fraction);
  }
  if (j.contains("model")) {
    const json& m = j.at("model");
    CheckKeys(m, "model", {"kind", "hidden_units", "embedding_dim", "epochs", "batch_size", "learning_rate"});
    const std::string kind = m.value("kind", std::string("lr"));
    if (kind == "lr") {
      c.model.head = HeadKind::kSumLogits;
    } else if (kind == "nn") {
      c.model.head = HeadKind::kConcatHead;
    } else {
      throw std::invalid_argument("model.kind must be 'lr' or 'nn'");
    }
    Read(m, "hidden_units", c.model.hidden_units);
    Read(m, "embedding_dim", c.model.embedding_dim);
    Read(m, "epochs", c.train.epochs);
    Read(m, "batch_size", c.train.batch_size);
    Read(m, "learning_rate", c.train.learning_rate);
  }
  if (j.contains("federation")) {
    const json& f = j.at("federation");
    CheckKeys(f, "federation", {"parties", "attack_strength"});
    Read(f, "parties", c.n_parties);
    Read(f, "attack_strength", c.attack_strength);
  }
  if (j.contains("defense")) c.defense = DefenseFromJson(j.at("defense"));
  if (j.contains("attack")) {
    const json& a = j.at("attack");
    CheckKeys(a, "attack", {"kind", "samples", "gia", "grn"});
    if (a.contains("kind")) c.attack = ParseAttackKind(a.at("kind").get<std::string>());
    Read(a, "samples", c.attack_samples);
    if (a.contains("gia")) {
      const json& g = a.at("gia");
      CheckKeys(g, "attack.gia", {"step_size", "max_iters", "tolerance", "clamp_lo", "clamp_hi", "restarts"});
      Read(g, "step_size", c.gia.step_size);
      Read(g, "max_iters", c.gia.max_iters);
      Read(g, "tolerance", c.gia.tolerance);
      Read(g, "clamp_lo", c.gia.clamp_lo);
      Read(g, "clamp_hi", c.gia.clamp_hi);
      Read(g, "restarts", c.gia.restarts);
    }
    if (a.contains("grn")) {
      const json& g = a.at("grn");
      CheckKeys(g, "attack.grn", {"hidden_units", "epochs", "batch_size", "step_size", "clip_norm"});
      Read(g, "hidden_units", c.grn.hidden_units);
      Read(g, "epochs", c.grn.epochs);
      Read(g, "batch_size", c.grn.batch_size);
      Read(g, "step_size", c.grn.step_size);
      Read(g, "clip_norm", c.grn.clip_norm);
    }
  }
  Read(j, "seed", c.seed);
  Read(j, "output", c.output_path);
  c.Validate();
  return c;
}

json RecordToJson(const ExperimentRecord& r) {
  return {
      {"defense", r.defense},
      {"attack", r.attack},
      {"n_parties", r.n_parties},
      {"attack_strength", r.attack_strength},
      {"epsilon", r.epsilon},
      {"mse_no_defense", r.mse_no_defense},
      {"mse_with_defense", r.mse_with_defense},
      {"random_guess_mse", r.random_guess_mse},
      {"accuracy_no_defense", r.accuracy_no_defense},
      {"accuracy_with_defense", r.accuracy_with_defense},
      {"delta_accuracy", r.delta_accuracy},
      {"accuracy_budget_exceeded", r.accuracy_budget_exceeded},
      {"defense_seconds_per_call", r.defense_seconds_per_call},
      {"attack_seconds", r.attack_seconds},
      {"train_seconds", r.train_seconds},
      {"seed", r.seed},
      {"timestamp", r.timestamp},
      {"config", r.config_json.empty() ? json(nullptr) : json::parse(r.config_json)},
  };
}

ExperimentRecord RecordFromJson(const json& j) {
  ExperimentRecord r;
  r.defense = j.at("defense").get<std::string>();
  r.attack = j.at("attack").get<std::string>();
  r.n_parties = j.at("n_parties").get<std::size_t>();
  r.attack_strength = j.at("attack_strength").get<double>();
  r.epsilon = j.at("epsilon").get<double>();
  r.mse_no_defense = j.at("mse_no_defense").get<double>();
  r.mse_with_defense = j.at("mse_with_defense").get<double>();
  r.random_guess_mse = j.at("random_guess_mse").get<double>();
  r.accuracy_no_defense = j.at("accuracy_no_defense").get<double>();
  r.accuracy_with_defense = j.at("accuracy_with_defense").get<double>();
  r.delta_accuracy = j.at("delta_accuracy").get<double>();
  r.accuracy_budget_exceeded = j.at("accuracy_budget_exceeded").get<bool>();
  r.defense_seconds_per_call = j.at("defense_seconds_per_call").get<double>();
  r.attack_seconds = j.at("attack_seconds").get<double>();
  r.train_seconds = j.at("train_seconds").get<double>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.timestamp = j.at("timestamp").get<std::string>();
  if (j.contains("config") && !j.at("config").is_null()) r.config_json = j.at("config").dump();
  if (r.delta_accuracy != r.accuracy_with_defense - r.accuracy_no_defense) {
    throw std::invalid_argument("record violates delta_accuracy = with - without");
  }
  return r;
}

json AttackReportToJson(const AttackReport& report) {
  json rows = json::array();
  for (std::size_t r = 0; r < report.reconstruction.rows(); ++r) {
    const auto row = report.reconstruction.row(r);
    rows.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return {
      {"reconstruction", rows},
      {"per_sample_sq_error", report.per_sample_sq_error},
      {"mse", report.mse},
      {"iterations", report.iterations},
      {"wall_clock_seconds", report.wall_clock_seconds},
  };
}

void WriteRecordsCsv(std::ostream& out, std::span<const ExperimentRecord> records) {
  out << "defense,attack,epsilon,n_parties,attack_strength,mse_without,mse_with,"
         "random_guess_mse,delta_accuracy,final_accuracy,accuracy_without,"
         "budget_exceeded,defense_seconds_per_call,seed\n";
  out << std::setprecision(17);
  for (const ExperimentRecord& r : records) {
    out << r.defense << "," << r.attack << "," << r.epsilon << "," << r.n_parties
        << "," << r.attack_strength << "," << r.mse_no_defense << ","
        << r.mse_with_defense << "," << r.random_guess_mse << ","
        << r.delta_accuracy << "," << r.accuracy_with_defense << ","
        << r.accuracy_no_defense << "," << (r.accuracy_budget_exceeded ? 1 : 0)
        << "," << r.defense_seconds_per_call << "," << r.seed << "\n";
  }
}

namespace {

std::string Escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += ch;
    }
  }
  return out;
}

}  // namespace

std::string RenderSvgChart(const std::string& title, const std::string& x_label,
                           const std::string& y_label,
                           std::span<const ChartSeries> series, bool log_x,
                           bool log_y) {
  constexpr double kW = 640, kH = 420, kLeft = 70, kRight = 160, kTop = 40, kBottom = 50;
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                  "#9467bd", "#8c564b", "#17becf"};
  auto tx = [&](double v) { return log_x ? std::log10(v) : v; };
  auto ty = [&](double v) { return log_y ? std::log10(v) : v; };

  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const ChartSeries& s : series) {
    if (s.x.size() != s.y.size()) throw std::invalid_argument("series x/y length mismatch");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if ((log_x && !(s.x[i] > 0)) || (log_y && !(s.y[i] > 0))) {
        throw std::invalid_argument("log axis needs positive values");
      }
      x0 = std::min(x0, tx(s.x[i]));
      x1 = std::max(x1, tx(s.x[i]));
      y0 = std::min(y0, ty(s.y[i]));
      y1 = std::max(y1, ty(s.y[i]));
    }
  }
  if (!(x0 <= x1)) throw std::invalid_argument("chart has no points");
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  const double pw = kW - kLeft - kRight, ph = kH - kTop - kBottom;
  auto px = [&](double v) { return kLeft + (tx(v) - x0) / (x1 - x0) * pw; };
  auto py = [&](double v) { return kTop + ph - (ty(v) - y0) / (y1 - y0) * ph; };

  std::ostringstream svg;
  svg << std::setprecision(6);
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << kW / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
      << Escape(title) << "</text>\n";
  svg << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw
      << "\" height=\"" << ph << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double fx = x0 + (x1 - x0) * t / 4.0;
    const double fy = y0 + (y1 - y0) * t / 4.0;
    const double vx = log_x ? std::pow(10.0, fx) : fx;
    const double vy = log_y ? std::pow(10.0, fy) : fy;
    svg << "<text x=\"" << kLeft + pw * t / 4.0 << "\" y=\"" << kTop + ph + 16
        << "\" text-anchor=\"middle\">" << vx << "</text>\n";
    svg << "<text x=\"" << kLeft - 6 << "\" y=\"" << kTop + ph - ph * t / 4.0 + 4
        << "\" text-anchor=\"end\">" << vy << "</text>\n";
  }
  svg << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kH - 10
      << "\" text-anchor=\"middle\">" << Escape(x_label) << "</text>\n";
  svg << "<text x=\"14\" y=\"" << kTop + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
      << kTop + ph / 2 << ")\">" << Escape(y_label) << "</text>\n";
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kColors[s % std::size(kColors)];
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < series[s].x.size(); ++i) {
      svg << (i ? " " : "") << px(series[s].x[i]) << "," << py(series[s].y[i]);
    }
    svg << "\"/>\n";
    for (std::size_t i = 0; i < series[s].x.size(); ++i) {
      svg << "<circle cx=\"" << px(series[s].x[i]) << "\" cy=\"" << py(series[s].y[i])
          << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    }
    svg << "<text x=\"" << kW - kRight + 10 << "\" y=\"" << kTop + 16 * (s + 1)
        << "\" fill=\"" << color << "\">" << Escape(series[s].name) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace scorelab
