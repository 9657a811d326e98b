#include "tgode/io.hpp"

#include "tgode/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace tgode {

using nlohmann::json;

std::string format_double(Scalar v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_edge_list(const std::filesystem::path& path, const Graph& g) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  for (Index e = 0; e < g.n_edges(); ++e) {
    const auto& [u, v] = g.edges()[static_cast<std::size_t>(e)];
    out << u << ' ' << v;
    if (g.has_edge_attrs())
      for (Index c = 0; c < g.edge_attrs().cols(); ++c)
        out << ' ' << format_double(g.edge_attrs()(e, c));
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

Graph read_edge_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path.string());
  std::vector<std::pair<Index, Index>> edges;
  std::vector<std::vector<Scalar>> attrs;
  Index max_node = -1;
  Index attr_width = -1;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    std::istringstream ss(line);
    long long u, v;
    if (!(ss >> u)) continue;  // blank or comment-only line
    if (!(ss >> v))
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                       ": expected two node indices");
    if (u < 0 || v < 0)
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                       ": negative node index");
    if (u == v)
      throw SelfLoopError(path.string() + ":" + std::to_string(line_no) +
                          ": self-loop at node " + std::to_string(u));
    std::vector<Scalar> row;
    Scalar a;
    while (ss >> a) row.push_back(a);
    if (!ss.eof())
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                       ": malformed edge attribute");
    if (attr_width < 0 && !edges.empty() && !row.empty())
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                       ": edge attributes start mid-file");
    if (attr_width >= 0 && static_cast<Index>(row.size()) != attr_width)
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                       ": edge attribute width differs from previous lines");
    if (attr_width < 0 && !row.empty())
      attr_width = static_cast<Index>(row.size());
    edges.emplace_back(static_cast<Index>(u), static_cast<Index>(v));
    if (attr_width > 0) attrs.push_back(std::move(row));
    max_node = std::max<Index>(max_node, std::max<Index>(u, v));
  }
  Matrix attr_matrix;
  if (attr_width > 0) {
    attr_matrix.resize(static_cast<Index>(attrs.size()), attr_width);
    for (std::size_t r = 0; r < attrs.size(); ++r)
      for (Index c = 0; c < attr_width; ++c)
        attr_matrix(static_cast<Index>(r), c) =
            attrs[r][static_cast<std::size_t>(c)];
  }
  return Graph::from_edges(max_node + 1, std::move(edges),
                           std::move(attr_matrix));
}

namespace {

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty() || !j[0].is_array())
    throw ParseError(where + ": expected an array of arrays");
  const Index rows = static_cast<Index>(j.size());
  const Index cols = static_cast<Index>(j[0].size());
  Matrix m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    const json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Index>(row.size()) != cols)
      throw ParseError(where + ": ragged rows");
    for (Index c = 0; c < cols; ++c) {
      const json& cell = row[static_cast<std::size_t>(c)];
      if (!cell.is_number())
        throw ParseError(where + ": non-numeric entry");
      m(r, c) = cell.get<Scalar>();
    }
  }
  return m;
}

}  // namespace

void write_snapshot_file(const std::filesystem::path& path,
                         const SnapshotSequence& seq) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  for (std::size_t i = 0; i < seq.size(); ++i) {
    const Snapshot& s = seq[i];
    json j;
    j["t"] = s.t;
    j["x"] = matrix_to_json(s.x);
    if (s.z) j["z"] = matrix_to_json(*s.z);
    out << j.dump() << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

SnapshotSequence read_snapshot_file(const std::filesystem::path& path,
                                    std::shared_ptr<const Graph> graph) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path.string());
  std::vector<Snapshot> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError(where + ": " + e.what());
    }
    if (!j.is_object()) throw ParseError(where + ": expected a JSON object");
    for (const auto& item : j.items())
      if (item.key() != "t" && item.key() != "x" && item.key() != "z")
        throw ParseError(where + ": unknown key '" + item.key() + "'");
    if (!j.contains("t") || !j["t"].is_number())
      throw ParseError(where + ": missing numeric 't'");
    if (!j.contains("x"))
      throw ParseError(where + ": missing 'x'");
    Snapshot s;
    s.t = j["t"].get<Scalar>();
    s.x = matrix_from_json(j["x"], where + ": x");
    if (j.contains("z")) s.z = matrix_from_json(j["z"], where + ": z");
    entries.push_back(std::move(s));
  }
  if (entries.empty())
    throw EmptySequenceError("empty snapshot file: " + path.string());
  return SnapshotSequence(std::move(entries), std::move(graph));
}

namespace {

constexpr int kCheckpointVersion = 1;

json mlp_to_json(const MlpWeights& w) {
  json j;
  j["w1"] = matrix_to_json(w.w1);
  j["b1"] = matrix_to_json(w.b1);
  j["w2"] = matrix_to_json(w.w2);
  j["b2"] = matrix_to_json(w.b2);
  return j;
}

MlpWeights mlp_from_json(const json& j, const std::string& where) {
  if (!j.is_object()) throw ParseError(where + ": expected an object");
  MlpWeights w;
  w.w1 = matrix_from_json(j.at("w1"), where + ".w1");
  w.b1 = matrix_from_json(j.at("b1"), where + ".b1");
  w.w2 = matrix_from_json(j.at("w2"), where + ".w2");
  w.b2 = matrix_from_json(j.at("b2"), where + ".b2");
  return w;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path,
                     const TgodeParams& p) {
  json j;
  j["format"] = "tgode_checkpoint";
  j["version"] = kCheckpointVersion;
  j["eps"] = p.eps;
  j["activation"] = to_string(p.activation);
  j["psi"] = to_string(p.psi_mode);
  j["theta"] = json::array();
  for (const Matrix& t : p.theta) j["theta"].push_back(matrix_to_json(t));
  j["encoder"] = p.encoder ? mlp_to_json(*p.encoder) : json(nullptr);
  j["readout"] = p.readout ? mlp_to_json(*p.readout) : json(nullptr);
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << j.dump() << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

TgodeParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  const std::string where = path.string();
  if (j.value("format", "") != "tgode_checkpoint")
    throw ParseError(where + ": not a checkpoint file");
  if (j.value("version", -1) != kCheckpointVersion)
    throw ParseError(where + ": unsupported checkpoint version");
  TgodeParams p;
  p.eps = j.at("eps").get<Scalar>();
  const auto act = activation_from_string(j.at("activation").get<std::string>());
  if (!act) throw ParseError(where + ": unknown activation");
  p.activation = *act;
  const auto psi = psi_from_string(j.at("psi").get<std::string>());
  if (!psi) throw ParseError(where + ": unknown psi mode");
  p.psi_mode = *psi;
  if (!j.at("theta").is_array() || j.at("theta").empty())
    throw ParseError(where + ": theta must be a non-empty array");
  for (std::size_t k = 0; k < j["theta"].size(); ++k)
    p.theta.push_back(matrix_from_json(
        j["theta"][k], where + ": theta[" + std::to_string(k) + "]"));
  if (!j.at("encoder").is_null())
    p.encoder = mlp_from_json(j["encoder"], where + ": encoder");
  if (!j.at("readout").is_null())
    p.readout = mlp_from_json(j["readout"], where + ": readout");
  if (p.encoder.has_value() != p.readout.has_value())
    throw ParseError(where + ": encoder and readout must appear together");
  return p;
}

std::string to_string(TaskKind t) {
  switch (t) {
    case TaskKind::HeatSingle: return "heat_single";
    case TaskKind::HeatMulti: return "heat_multi";
    case TaskKind::External: return "external";
  }
  return "?";
}

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const auto piece =
        comma == std::string::npos ? s.substr(start) : s.substr(start, comma - start);
    out.push_back(trim(piece));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

Scalar parse_double_strict(const std::string& s, const std::string& field) {
  const std::string t = trim(s);
  if (t.empty()) throw InvalidValueError(field + ": empty number");
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size())
    throw InvalidValueError(field + ": not a number: '" + t + "'");
  return v;
}

std::int64_t parse_int_strict(const std::string& s, const std::string& field) {
  const std::string t = trim(s);
  if (t.empty()) throw InvalidValueError(field + ": empty integer");
  char* end = nullptr;
  const long long v = std::strtoll(t.c_str(), &end, 10);
  if (end != t.c_str() + t.size())
    throw InvalidValueError(field + ": not an integer: '" + t + "'");
  return v;
}

std::uint64_t parse_uint_strict(const std::string& s,
                                const std::string& field) {
  const std::string t = trim(s);
  if (t.empty() || t[0] == '-')
    throw InvalidValueError(field + ": not an unsigned integer: '" + t + "'");
  char* end = nullptr;
  const unsigned long long v = std::strtoull(t.c_str(), &end, 10);
  if (end != t.c_str() + t.size())
    throw InvalidValueError(field + ": not an unsigned integer: '" + t + "'");
  return v;
}

void require_subset(const std::vector<Scalar>& values,
                    const std::vector<Scalar>& allowed,
                    const std::string& field) {
  for (const Scalar v : values)
    if (std::find(allowed.begin(), allowed.end(), v) == allowed.end())
      throw InvalidValueError(field + ": value " + format_double(v) +
                              " is not in the task family's grid");
}

}  // namespace

RunConfig read_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path.string());
  return parse_run_config(in, path.string());
}

RunConfig parse_run_config(std::istream& in, const std::string& origin) {
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ParseError(origin + ":" + std::to_string(line_no) +
                       ": expected 'key = value'");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty())
      throw ParseError(origin + ":" + std::to_string(line_no) + ": empty key");
    if (kv.count(key))
      throw ParseError(origin + ":" + std::to_string(line_no) +
                       ": duplicate key '" + key + "'");
    kv[key] = value;
  }

  static const std::set<std::string> known{
      "task",          "diffusion",      "rows",
      "cols",          "data_seed",      "trial_seed",
      "lr",            "weight_decay",   "psi",
      "activation",    "embedding",      "eps",
      "hops",          "max_epochs",     "patience",
      "workers",       "out",            "train_snapshots",
      "val_snapshots", "test_snapshots", "edges"};
  for (const auto& [key, value] : kv)
    if (!known.count(key))
      throw UnknownKeyError(origin + ": unknown key '" + key + "'");

  if (!kv.count("task")) throw ParseError(origin + ": missing key 'task'");

  RunConfig cfg;
  const std::string& task = kv["task"];
  if (task == "heat_single") cfg.task = TaskKind::HeatSingle;
  else if (task == "heat_multi") cfg.task = TaskKind::HeatMulti;
  else if (task == "external") cfg.task = TaskKind::External;
  else throw InvalidValueError(origin + ": task: unknown task '" + task + "'");

  const bool heat = cfg.task != TaskKind::External;

  // family defaults
  if (heat) {
    cfg.grid.embedding = {std::nullopt, Index(8)};
    cfg.grid.eps = {1e-3};
    cfg.grid.hops = {5};
  } else {
    cfg.grid.embedding = {Index(64), Index(32)};
    cfg.grid.eps = {1.0, 0.5, 1e-1, 1e-2, 1e-3};
    cfg.grid.hops = {1, 2, 5};
  }

  auto has = [&](const char* k) { return kv.count(k) > 0; };

  if (has("diffusion")) {
    if (!heat)
      throw InvalidValueError(origin +
                              ": diffusion: only valid for heat tasks");
    const auto kind = diffusion_from_string(kv["diffusion"]);
    if (!kind)
      throw InvalidValueError(origin + ": diffusion: unknown kind '" +
                              kv["diffusion"] + "'");
    cfg.diffusion = *kind;
  }
  if (has("rows")) {
    cfg.rows = parse_int_strict(kv["rows"], origin + ": rows");
    if (cfg.rows < 1) throw InvalidValueError(origin + ": rows must be >= 1");
  }
  if (has("cols")) {
    cfg.cols = parse_int_strict(kv["cols"], origin + ": cols");
    if (cfg.cols < 1) throw InvalidValueError(origin + ": cols must be >= 1");
  }
  if (has("data_seed"))
    cfg.data_seed = parse_uint_strict(kv["data_seed"], origin + ": data_seed");
  if (has("trial_seed"))
    cfg.grid.base_seed =
        parse_uint_strict(kv["trial_seed"], origin + ": trial_seed");

  if (has("lr")) {
    cfg.grid.lr.clear();
    for (const auto& s : split_list(kv["lr"]))
      cfg.grid.lr.push_back(parse_double_strict(s, origin + ": lr"));
  }
  if (has("weight_decay")) {
    cfg.grid.weight_decay.clear();
    for (const auto& s : split_list(kv["weight_decay"]))
      cfg.grid.weight_decay.push_back(
          parse_double_strict(s, origin + ": weight_decay"));
  }
  if (has("psi")) {
    cfg.grid.psi.clear();
    for (const auto& s : split_list(kv["psi"])) {
      const auto mode = psi_from_string(s);
      if (!mode)
        throw InvalidValueError(origin + ": psi: unknown mode '" + s + "'");
      cfg.grid.psi.push_back(*mode);
    }
  }
  if (has("activation")) {
    cfg.grid.activation.clear();
    for (const auto& s : split_list(kv["activation"])) {
      const auto act = activation_from_string(s);
      if (!act)
        throw InvalidValueError(origin + ": activation: unknown '" + s + "'");
      cfg.grid.activation.push_back(*act);
    }
  }
  if (has("embedding")) {
    cfg.grid.embedding.clear();
    for (const auto& s : split_list(kv["embedding"])) {
      if (s == "none") {
        cfg.grid.embedding.push_back(std::nullopt);
      } else {
        const auto dim = parse_int_strict(s, origin + ": embedding");
        if (dim < 1)
          throw InvalidValueError(origin + ": embedding must be >= 1");
        cfg.grid.embedding.push_back(static_cast<Index>(dim));
      }
    }
  }
  if (has("eps")) {
    cfg.grid.eps.clear();
    for (const auto& s : split_list(kv["eps"]))
      cfg.grid.eps.push_back(parse_double_strict(s, origin + ": eps"));
  }
  if (has("hops")) {
    cfg.grid.hops.clear();
    for (const auto& s : split_list(kv["hops"])) {
      const auto h = parse_int_strict(s, origin + ": hops");
      if (h < 0) throw InvalidValueError(origin + ": hops must be >= 0");
      cfg.grid.hops.push_back(static_cast<int>(h));
    }
  }
  if (has("max_epochs")) {
    cfg.grid.max_epochs =
        parse_int_strict(kv["max_epochs"], origin + ": max_epochs");
    if (cfg.grid.max_epochs < 1)
      throw InvalidValueError(origin + ": max_epochs must be >= 1");
  }
  if (has("patience")) {
    cfg.grid.patience = parse_int_strict(kv["patience"], origin + ": patience");
    if (cfg.grid.patience < 1)
      throw InvalidValueError(origin + ": patience must be >= 1");
  }
  if (has("workers")) {
    cfg.workers = static_cast<int>(
        parse_int_strict(kv["workers"], origin + ": workers"));
    if (cfg.workers < 0)
      throw InvalidValueError(origin + ": workers must be >= 0");
  }
  if (has("out")) cfg.out = kv["out"];
  if (has("train_snapshots")) cfg.train_snapshots = kv["train_snapshots"];
  if (has("val_snapshots")) cfg.val_snapshots = kv["val_snapshots"];
  if (has("test_snapshots")) cfg.test_snapshots = kv["test_snapshots"];
  if (has("edges")) cfg.edges = kv["edges"];

  // grid values must come from the task family's menu
  require_subset(cfg.grid.lr, {1e-2, 1e-3, 1e-4}, origin + ": lr");
  require_subset(cfg.grid.weight_decay, {1e-2, 1e-3},
                 origin + ": weight_decay");
  if (heat) {
    require_subset(cfg.grid.eps, {1e-3}, origin + ": eps");
    for (const int h : cfg.grid.hops)
      if (h != 5)
        throw InvalidValueError(origin +
                                ": hops: heat tasks use 5 neighbourhood hops");
    for (const auto& e : cfg.grid.embedding)
      if (e && *e != 8)
        throw InvalidValueError(origin +
                                ": embedding: heat tasks allow none or 8");
  } else {
    require_subset(cfg.grid.eps, {1.0, 0.5, 1e-1, 1e-2, 1e-3},
                   origin + ": eps");
    for (const int h : cfg.grid.hops)
      if (h != 1 && h != 2 && h != 5)
        throw InvalidValueError(origin + ": hops: allowed values are 1, 2, 5");
    for (const auto& e : cfg.grid.embedding)
      if (!e || (*e != 32 && *e != 64))
        throw InvalidValueError(origin +
                                ": embedding: allowed values are 32, 64");
    if (cfg.train_snapshots.empty() || cfg.val_snapshots.empty() ||
        cfg.test_snapshots.empty() || cfg.edges.empty())
      throw ParseError(origin +
                       ": external task requires train_snapshots, "
                       "val_snapshots, test_snapshots and edges");
  }
  return cfg;
}

std::string results_csv_header() {
  return "trial,lr,weight_decay,psi,activation,embedding,eps,hops,seed,"
         "diverged,best_val_mae,test_mae,test_log10_mae,epochs_run,"
         "wall_time_s,parameters";
}

std::string results_csv_row(const TrialResult& r) {
  std::ostringstream out;
  out << r.config_index << ',' << format_double(r.config.lr) << ','
      << format_double(r.config.weight_decay) << ','
      << to_string(r.config.psi_mode) << ',' << to_string(r.config.activation)
      << ',';
  if (r.config.embedding)
    out << *r.config.embedding;
  else
    out << "none";
  out << ',' << format_double(r.config.eps) << ',' << r.config.hops << ','
      << r.config.seed << ',' << (r.diverged ? 1 : 0) << ','
      << format_double(r.best_val_mae) << ',' << format_double(r.test_mae)
      << ',';
  if (std::isinf(r.test_log10_mae) && r.test_log10_mae < 0)
    out << format_double(kLogMaeSentinel);
  else
    out << format_double(r.test_log10_mae);
  out << ',' << r.epochs_run << ',' << format_double(r.wall_time_s) << ','
      << r.parameter_count;
  return out.str();
}

}  // namespace tgode
