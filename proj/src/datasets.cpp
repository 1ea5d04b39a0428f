// SPDX-License-Identifier: Apache-2.0
#include "hogfusion/datasets.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "hogfusion/error.hpp"
#include "hogfusion/rng.hpp"

namespace hogfusion::datasets {

std::map<int, std::size_t> DatasetManifest::class_counts() const {
  std::map<int, std::size_t> counts;
  for (const auto& r : records) ++counts[r.label];
  return counts;
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream s(line);
  while (std::getline(s, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

}  // namespace

DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::FileNotFound, path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::ParseError, path.string() + ": empty manifest");

  const auto header = split_csv(trim(line));
  auto column = [&](const char* name) {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (trim(header[i]) == name) return i;
    throw Error(ErrorCode::MissingColumn, path.string() + ": no '" + name + "' column");
  };
  const std::size_t id_col = column("id"), path_col = column("path"), label_col = column("label");
  const std::size_t needed = std::max({id_col, path_col, label_col}) + 1;

  DatasetManifest m;
  std::unordered_set<std::string> seen;
  const auto base = path.parent_path();
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    const std::string where = path.string() + " line " + std::to_string(line_no);
    if (cells.size() < needed) throw Error(ErrorCode::ParseError, where + ": too few columns");
    ManifestRecord r;
    r.id = trim(cells[id_col]);
    if (r.id.empty()) throw Error(ErrorCode::ParseError, where + ": empty id");
    const std::string label = trim(cells[label_col]);
    const auto res = std::from_chars(label.data(), label.data() + label.size(), r.label);
    if (res.ec != std::errc() || res.ptr != label.data() + label.size())
      throw Error(ErrorCode::ParseError, where + ": label '" + label + "' is not an integer");
    if (r.label < 0) throw Error(ErrorCode::ParseError, where + ": negative label");
    std::filesystem::path p = trim(cells[path_col]);
    r.path = p.is_relative() && !p.empty() ? base / p : p;
    if (!seen.insert(r.id).second) throw Error(ErrorCode::DuplicateId, where + ": duplicate id '" + r.id + "'");
    m.records.push_back(std::move(r));
  }
  return m;
}

void save_manifest(const DatasetManifest& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << "id,path,label\n";
  const auto base = path.parent_path();
  for (const auto& r : m.records) {
    auto p = r.path;
    if (!base.empty() && p.is_absolute()) {
      std::error_code ec;
      auto rel = std::filesystem::relative(p, base, ec);
      if (!ec && !rel.empty()) p = rel;
    }
    out << r.id << ',' << p.generic_string() << ',' << r.label << '\n';
  }
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

DatasetManifest binarize_dr(const DatasetManifest& m) {
  DatasetManifest out = m;
  for (auto& r : out.records) {
    if (r.label < 0 || r.label > 4)
      throw Error(ErrorCode::LabelOutOfRange, "DR grade " + std::to_string(r.label) + " for '" + r.id + "'");
    r.label = r.label == 0 ? 0 : 1;
  }
  return out;
}

namespace {

// Per-class index lists in ascending label order, each shuffled with its own stream.
std::vector<std::vector<std::size_t>> shuffled_classes(const DatasetManifest& m, std::uint64_t seed) {
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < m.records.size(); ++i) by_class[m.records[i].label].push_back(i);
  std::vector<std::vector<std::size_t>> out;
  for (auto& [label, idx] : by_class) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(label)));
    rng.shuffle(std::span<std::size_t>(idx));
    out.push_back(std::move(idx));
  }
  return out;
}

}  // namespace

SplitPlan split_train_test(const DatasetManifest& m, double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw Error(ErrorCode::InvalidParams, "split ratio must be in (0, 1)");
  const std::size_t n = m.size();
  if (n < 2) throw Error(ErrorCode::ClassTooSmall, "need at least two samples to split");

  const auto classes = shuffled_classes(m, seed);
  const auto total = static_cast<long>(std::lround(ratio * static_cast<double>(n)));
  std::vector<long> take(classes.size());
  std::vector<double> exact(classes.size());
  long sum = 0;
  for (std::size_t c = 0; c < classes.size(); ++c) {
    exact[c] = ratio * static_cast<double>(classes[c].size());
    take[c] = std::lround(exact[c]);
    sum += take[c];
  }
  // Rebalance toward the global total, one sample at a time.
  while (sum != total) {
    const bool reduce = sum > total;
    std::size_t pick = classes.size();
    double best = 0.0;
    for (std::size_t c = 0; c < classes.size(); ++c) {
      const double excess = static_cast<double>(take[c]) - exact[c];
      const double score = reduce ? excess : -excess;
      const bool feasible = reduce ? take[c] > 0 : take[c] < static_cast<long>(classes[c].size());
      if (feasible && (pick == classes.size() || score > best)) {
        pick = c;
        best = score;
      }
    }
    take[pick] += reduce ? -1 : 1;
    sum += reduce ? -1 : 1;
  }

  std::vector<char> in_train(n, 0);
  for (std::size_t c = 0; c < classes.size(); ++c)
    for (long i = 0; i < take[c]; ++i) in_train[classes[c][static_cast<std::size_t>(i)]] = 1;

  SplitPlan plan;
  plan.seed = seed;
  plan.ratio = ratio;
  for (std::size_t i = 0; i < n; ++i) (in_train[i] ? plan.train_ids : plan.test_ids).push_back(m.records[i].id);
  return plan;
}

FoldPlan kfold(const DatasetManifest& m, int k, std::uint64_t seed) {
  if (k < 2) throw Error(ErrorCode::InvalidParams, "k must be at least 2");
  const auto uk = static_cast<std::size_t>(k);
  if (m.size() < uk) throw Error(ErrorCode::ClassTooSmall, "fewer samples than folds");
  for (const auto& [label, count] : m.class_counts())
    if (count < uk)
      throw Error(ErrorCode::ClassTooSmall, "class " + std::to_string(label) + " has " + std::to_string(count) +
                                                " samples, fewer than k=" + std::to_string(k));

  std::vector<std::vector<std::size_t>> fold_idx(uk);
  std::size_t next = 0;
  for (const auto& cls : shuffled_classes(m, seed))
    for (std::size_t i : cls) fold_idx[next++ % uk].push_back(i);

  FoldPlan plan;
  plan.seed = seed;
  plan.folds.resize(uk);
  for (std::size_t f = 0; f < uk; ++f) {
    std::sort(fold_idx[f].begin(), fold_idx[f].end());
    for (std::size_t i : fold_idx[f]) plan.folds[f].push_back(m.records[i].id);
  }
  return plan;
}

// ---- plan files ------------------------------------------------------------
// Line-oriented: `key value` settings, then `[section]` headers each followed
// by one id per line.

void write_plan(const SplitPlan& plan, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  char ratio[32];
  const auto res = std::to_chars(ratio, ratio + sizeof ratio, plan.ratio);
  out << "kind split\nseed " << plan.seed << "\nratio " << std::string(ratio, res.ptr) << "\n[train]\n";
  for (const auto& id : plan.train_ids) out << id << '\n';
  out << "[test]\n";
  for (const auto& id : plan.test_ids) out << id << '\n';
}

void write_plan(const FoldPlan& plan, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << "kind folds\nseed " << plan.seed << "\nk " << plan.folds.size() << '\n';
  for (std::size_t f = 0; f < plan.folds.size(); ++f) {
    out << "[fold " << f << "]\n";
    for (const auto& id : plan.folds[f]) out << id << '\n';
  }
}

namespace {

struct PlanFile {
  std::map<std::string, std::string> settings;
  std::vector<std::pair<std::string, std::vector<std::string>>> sections;
};

PlanFile read_plan_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::FileNotFound, path.string());
  PlanFile pf;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']') {
      pf.sections.emplace_back(line.substr(1, line.size() - 2), std::vector<std::string>{});
    } else if (!pf.sections.empty()) {
      pf.sections.back().second.push_back(line);
    } else {
      const auto sp = line.find(' ');
      if (sp == std::string::npos) throw Error(ErrorCode::ParseError, path.string() + ": bad setting '" + line + "'");
      pf.settings[line.substr(0, sp)] = line.substr(sp + 1);
    }
  }
  return pf;
}

std::uint64_t parse_u64(const std::string& s, const std::filesystem::path& path) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc()) throw Error(ErrorCode::ParseError, path.string() + ": bad integer '" + s + "'");
  return v;
}

}  // namespace

SplitPlan read_split_plan(const std::filesystem::path& path) {
  const auto pf = read_plan_file(path);
  if (pf.settings.count("kind") == 0 || pf.settings.at("kind") != "split")
    throw Error(ErrorCode::ParseError, path.string() + ": not a split plan");
  SplitPlan plan;
  plan.seed = parse_u64(pf.settings.at("seed"), path);
  plan.ratio = std::stod(pf.settings.at("ratio"));
  for (const auto& [name, ids] : pf.sections) {
    if (name == "train") plan.train_ids = ids;
    else if (name == "test") plan.test_ids = ids;
    else throw Error(ErrorCode::ParseError, path.string() + ": unknown section [" + name + "]");
  }
  return plan;
}

FoldPlan read_fold_plan(const std::filesystem::path& path) {
  const auto pf = read_plan_file(path);
  if (pf.settings.count("kind") == 0 || pf.settings.at("kind") != "folds")
    throw Error(ErrorCode::ParseError, path.string() + ": not a fold plan");
  FoldPlan plan;
  plan.seed = parse_u64(pf.settings.at("seed"), path);
  for (const auto& [name, ids] : pf.sections) plan.folds.push_back(ids);
  if (plan.folds.size() != parse_u64(pf.settings.at("k"), path))
    throw Error(ErrorCode::ParseError, path.string() + ": fold count differs from k");
  return plan;
}

}  // namespace hogfusion::datasets
