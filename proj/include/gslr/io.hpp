#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "gslr/eval.hpp"
#include "gslr/graph.hpp"
#include "gslr/gslr.hpp"
#include "gslr/logistic.hpp"
#include "gslr/random.hpp"
#include "gslr/version.hpp"

namespace gslr {

using Json = nlohmann::ordered_json;

inline std::string format_double(double v) {
  char buf[64];
  const std::to_chars_result res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace detail {

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + path + " for reading");
  return in;
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot open " + path + " for writing");
  return out;
}

}  // namespace detail

// ---- datasets: CSV with a header row, final column "label" ----

inline void write_dataset_csv(std::ostream& out, const LabeledDataset& ds) {
  const int d = ds.dim();
  for (int j = 0; j < d; ++j) {
    if (!ds.feature_names.empty())
      out << ds.feature_names[j];
    else
      out << "f" << j;
    out << ',';
  }
  out << "label\n";
  for (int i = 0; i < ds.sample_count(); ++i) {
    for (int j = 0; j < d; ++j) out << format_double(ds.features(i, j)) << ',';
    out << ds.labels[i] << '\n';
  }
}

inline LabeledDataset read_dataset_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InvalidInput("dataset file is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header;
  {
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) header.push_back(field);
  }
  if (header.size() < 2 || header.back() != "label")
    throw InvalidInput("dataset header must end with a 'label' column");
  const std::size_t d = header.size() - 1;

  LabeledDataset ds;
  ds.feature_names.assign(header.begin(), header.end() - 1);
  std::vector<double> values;
  std::vector<int> labels;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::size_t start = 0;
    std::size_t field_index = 0;
    while (start <= line.size()) {
      const std::size_t comma = line.find(',', start);
      const std::string_view field(line.data() + start,
                                   (comma == std::string::npos ? line.size() : comma) - start);
      if (field_index < d) {
        double v;
        const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
        if (res.ec != std::errc() || res.ptr != field.data() + field.size())
          throw InvalidInput("line " + std::to_string(line_no) + ": bad number '" +
                             std::string(field) + "'");
        values.push_back(v);
      } else if (field_index == d) {
        int y;
        const auto res = std::from_chars(field.data(), field.data() + field.size(), y);
        if (res.ec != std::errc() || res.ptr != field.data() + field.size())
          throw InvalidInput("line " + std::to_string(line_no) + ": bad label '" +
                             std::string(field) + "'");
        labels.push_back(y);
      } else {
        throw InvalidInput("line " + std::to_string(line_no) + ": too many fields");
      }
      ++field_index;
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (field_index != d + 1)
      throw InvalidInput("line " + std::to_string(line_no) + ": expected " +
                         std::to_string(d + 1) + " fields, got " + std::to_string(field_index));
  }
  if (labels.empty()) throw InvalidInput("dataset has no samples");

  const int n = static_cast<int>(labels.size());
  ds.features.resize(n, static_cast<Eigen::Index>(d));
  for (int i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) ds.features(i, static_cast<Eigen::Index>(j)) = values[i * d + j];
  ds.labels = std::move(labels);
  int max_label = 1;
  for (int y : ds.labels) max_label = std::max(max_label, y);
  ds.class_count = max_label + 1;
  validate_dataset(ds);
  return ds;
}

// ---- plain-text node lists and vectors ----

inline std::vector<std::string> read_name_list(std::istream& in) {
  std::vector<std::string> names;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    while (!line.empty() && (line.back() == ' ' || line.back() == '\t')) line.pop_back();
    std::size_t start = 0;
    while (start < line.size() && (line[start] == ' ' || line[start] == '\t')) ++start;
    line = line.substr(start);
    if (line.empty() || line[0] == '#') continue;
    names.push_back(line);
  }
  return names;
}

inline NodeSet names_to_nodes(const FeatureGraph& g, const std::vector<std::string>& names) {
  std::vector<NodeId> ids;
  ids.reserve(names.size());
  for (const std::string& name : names) {
    const auto id = g.find_node(name);
    if (!id) throw InvalidInput("node '" + name + "' not in graph");
    ids.push_back(*id);
  }
  return make_node_set(ids);
}

inline std::vector<double> read_vector_file(std::istream& in) {
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::size_t start = line.find_first_not_of(" \t");
    if (start == std::string::npos) continue;
    std::size_t end = line.find_last_not_of(" \t");
    const std::string_view field(line.data() + start, end - start + 1);
    if (field[0] == '#') continue;
    double v;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (res.ec != std::errc() || res.ptr != field.data() + field.size())
      throw InvalidInput("line " + std::to_string(line_no) + ": bad number '" +
                         std::string(field) + "'");
    values.push_back(v);
  }
  return values;
}

inline void write_vector_file(std::ostream& out, const std::vector<double>& values) {
  for (double v : values) out << format_double(v) << '\n';
}

// ---- model JSON ----
// Binary models store the effective single-logit view (class 1 minus
// class 0), which predicts identically; multiclass models store all rows.

inline Json model_to_json(const WeightVector& w, const std::vector<std::string>& names,
                          const NodeSet& support) {
  const int K = w.class_count();
  const int d = w.dim();
  if (!names.empty() && static_cast<int>(names.size()) != d)
    throw InvalidInput("feature name count does not match weight dimension");
  auto name_of = [&](int j) { return names.empty() ? "f" + std::to_string(j) : names[j]; };

  Json weights = Json::object();
  for (NodeId v : support) {
    const int j = static_cast<int>(v);
    if (K == 2) {
      weights[name_of(j)] = w.coefficients(1, j) - w.coefficients(0, j);
    } else {
      Json per_class = Json::array();
      for (int k = 0; k < K; ++k) per_class.push_back(w.coefficients(k, j));
      weights[name_of(j)] = per_class;
    }
  }
  Json out;
  out["class_count"] = K;
  if (K == 2) {
    out["intercept"] = w.intercept(1) - w.intercept(0);
  } else {
    Json b = Json::array();
    for (int k = 0; k < K; ++k) b.push_back(w.intercept(k));
    out["intercept"] = b;
  }
  out["weights"] = weights;
  out["sparsity"] = support.size();
  Json support_names = Json::array();
  for (NodeId v : support) support_names.push_back(name_of(static_cast<int>(v)));
  out["support"] = support_names;
  return out;
}

inline WeightVector model_from_json(const Json& j, const std::vector<std::string>& names) {
  const int K = j.at("class_count").get<int>();
  const int d = static_cast<int>(names.size());
  WeightVector w = WeightVector::zeros(K, d);
  std::unordered_map<std::string, int> index;
  for (int i = 0; i < d; ++i) index[names[i]] = i;
  for (const auto& [name, value] : j.at("weights").items()) {
    const auto it = index.find(name);
    if (it == index.end()) throw InvalidInput("model feature '" + name + "' not in dataset");
    if (K == 2) {
      w.coefficients(1, it->second) = value.get<double>();
    } else {
      for (int k = 0; k < K; ++k) w.coefficients(k, it->second) = value.at(k).get<double>();
    }
  }
  if (K == 2) {
    w.intercept(1) = j.at("intercept").get<double>();
  } else {
    for (int k = 0; k < K; ++k) w.intercept(k) = j.at("intercept").at(k).get<double>();
  }
  return w;
}

inline Json trace_to_json(const std::vector<GSLRTraceEntry>& trace) {
  Json arr = Json::array();
  for (const GSLRTraceEntry& t : trace) {
    Json e;
    e["iteration"] = t.iteration;
    e["loss_before_projection"] = t.loss_before_projection;
    e["loss_after_projection"] = t.loss_after_projection;
    e["support_size"] = t.support_size;
    e["lambdas"] = t.lambdas;
    arr.push_back(e);
  }
  return arr;
}

// ---- benchmark report ----

inline Json report_to_json(const BenchmarkReport& r) {
  Json out;
  out["folds"] = r.folds;
  out["seed"] = r.seed;
  out["standardized"] = r.standardized;
  out["datasets"] = r.dataset_names;
  Json cells = Json::array();
  for (const BenchmarkCell& c : r.cells) {
    Json jc;
    jc["dataset"] = c.dataset;
    jc["method"] = c.method;
    jc["grid_value"] = c.grid_value;
    jc["fold"] = c.fold;
    jc["failed"] = c.failed;
    if (c.failed) {
      jc["error"] = c.error;
    } else {
      jc["accuracy"] = c.accuracy;
      if (c.precision)
        jc["precision"] = *c.precision;
      else
        jc["precision"] = nullptr;
      jc["recall"] = c.recall;
      jc["support_size"] = c.support_size;
    }
    cells.push_back(jc);
  }
  out["cells"] = cells;
  Json summaries = Json::array();
  for (const GridSummary& s : r.summaries) {
    Json js;
    js["method"] = s.method;
    js["grid_value"] = s.grid_value;
    js["cells"] = s.cells;
    js["failed_cells"] = s.failed_cells;
    js["mean_accuracy"] = s.mean_accuracy;
    if (s.mean_precision)
      js["mean_precision"] = *s.mean_precision;
    else
      js["mean_precision"] = nullptr;
    js["precision_excluded"] = s.precision_excluded;
    js["mean_recall"] = s.mean_recall;
    js["mean_support_size"] = s.mean_support_size;
    summaries.push_back(js);
  }
  out["summaries"] = summaries;
  Json matched = Json::array();
  for (const MatchedPair& m : r.matched) {
    Json jm;
    jm["gslr_grid"] = m.gslr_grid;
    jm["l1_grid"] = m.l1_grid;
    jm["gslr_support"] = m.gslr_support;
    jm["l1_support"] = m.l1_support;
    jm["gslr_precision"] = m.gslr_precision ? Json(*m.gslr_precision) : Json(nullptr);
    jm["l1_precision"] = m.l1_precision ? Json(*m.l1_precision) : Json(nullptr);
    jm["gslr_recall"] = m.gslr_recall;
    jm["l1_recall"] = m.l1_recall;
    jm["gslr_accuracy"] = m.gslr_accuracy;
    jm["l1_accuracy"] = m.l1_accuracy;
    matched.push_back(jm);
  }
  out["matched"] = matched;
  return out;
}

inline void write_report_csv(std::ostream& out, const BenchmarkReport& r) {
  out << "dataset,method,grid_value,fold,accuracy,precision,recall,support_size\n";
  for (const BenchmarkCell& c : r.cells) {
    out << c.dataset << ',' << c.method << ',' << format_double(c.grid_value) << ',' << c.fold
        << ',';
    if (c.failed) {
      out << ",,,\n";
      continue;
    }
    out << format_double(c.accuracy) << ',';
    if (c.precision) out << format_double(*c.precision);
    out << ',' << format_double(c.recall) << ',' << c.support_size << '\n';
  }
}

}  // namespace gslr
