#include "cogrelay/config.hpp"

#include <cerrno>
#include <cstdlib>
#include <limits>
#include <set>

#include "cogrelay/io.hpp"

namespace cogrelay {

namespace {

struct Token {
  std::string text;
  int col = 0;  // 1-based
};

// Splits one line into whitespace-separated tokens, dropping '#' comments.
std::vector<Token> tokenize_line(const std::string& line) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    if (line[i] == ' ' || line[i] == '\t') {
      ++i;
      continue;
    }
    if (line[i] == '#') break;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' &&
           line[i] != '#') {
      ++i;
    }
    tokens.push_back({line.substr(start, i - start),
                      static_cast<int>(start) + 1});
  }
  return tokens;
}

}  // namespace

ConfigNode parse_config_text(const std::string& text) {
  ConfigNode root;
  std::vector<ConfigNode*> stack{&root};
  std::vector<int> open_lines;

  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = text.find('\n', pos);
    const std::string line =
        text.substr(pos, eol == std::string::npos ? std::string::npos
                                                  : eol - pos);
    ++line_no;
    pos = eol == std::string::npos ? text.size() + 1 : eol + 1;

    const std::vector<Token> tokens = tokenize_line(line);
    if (tokens.empty()) continue;

    ConfigNode& scope = *stack.back();
    if (tokens[0].text == "}") {
      if (tokens.size() > 1) {
        throw ConfigParseError(line_no, tokens[1].col,
                               "unexpected token after '}'");
      }
      if (stack.size() == 1) {
        throw ConfigParseError(line_no, tokens[0].col,
                               "'}' without a matching open section");
      }
      stack.pop_back();
      open_lines.pop_back();
      continue;
    }

    const std::string& key = tokens[0].text;
    if (key == "{") {
      throw ConfigParseError(line_no, tokens[0].col,
                             "section needs a name before '{'");
    }
    if (tokens.size() >= 2 && tokens.back().text == "{") {
      if (tokens.size() != 2) {
        throw ConfigParseError(line_no, tokens[1].col,
                               "unexpected tokens between name and '{'");
      }
      if (scope.sections.count(key) || scope.values.count(key)) {
        throw ConfigParseError(line_no, tokens[0].col,
                               "duplicate key '" + key + "'");
      }
      scope.section_lines[key] = line_no;
      stack.push_back(&scope.sections[key]);
      open_lines.push_back(line_no);
      continue;
    }

    if (scope.sections.count(key) || scope.values.count(key)) {
      throw ConfigParseError(line_no, tokens[0].col,
                             "duplicate key '" + key + "'");
    }
    ConfigValue value;
    value.line = line_no;
    for (std::size_t i = 1; i < tokens.size(); ++i) {
      if (tokens[i].text == "{" || tokens[i].text == "}") {
        throw ConfigParseError(line_no, tokens[i].col,
                               "braces must open or close a section line");
      }
      value.tokens.push_back(tokens[i].text);
    }
    scope.values[key] = std::move(value);
  }

  if (stack.size() != 1) {
    throw ConfigParseError(line_no, 1,
                           "unclosed section opened on line " +
                               std::to_string(open_lines.back()));
  }
  return root;
}

namespace {

/**
 * Schema walker: reads typed values out of the parsed tree, records every
 * problem as a key-path diagnostic, and tracks which paths were consumed so
 * leftovers can be reported as unknown keys.
 */
class Binder {
 public:
  explicit Binder(const ConfigNode& root, std::vector<std::string>& diags)
      : root_(&root), diags_(&diags) {}

  const ConfigNode* section(const ConfigNode* parent,
                            const std::string& parent_path,
                            const std::string& name) {
    if (parent == nullptr) return nullptr;
    const std::string path = join(parent_path, name);
    visited_.insert(path);
    const auto it = parent->sections.find(name);
    if (it == parent->sections.end()) {
      if (parent->values.count(name)) {
        add(path + ": expected a section, found a value");
      } else {
        add(path + ": missing section");
      }
      return nullptr;
    }
    return &it->second;
  }

  const ConfigValue* value(const ConfigNode* parent,
                           const std::string& parent_path,
                           const std::string& name) {
    if (parent == nullptr) return nullptr;
    const std::string path = join(parent_path, name);
    visited_.insert(path);
    const auto it = parent->values.find(name);
    if (it == parent->values.end()) {
      if (parent->sections.count(name)) {
        add(path + ": expected a value, found a section");
      } else {
        add(path + ": missing key");
      }
      return nullptr;
    }
    return &it->second;
  }

  double number(const ConfigNode* parent, const std::string& parent_path,
                const std::string& name, double fallback) {
    const ConfigValue* v = value(parent, parent_path, name);
    if (v == nullptr) return fallback;
    const std::string path = join(parent_path, name);
    if (v->tokens.size() != 1) {
      add(path + ": expected exactly one number");
      return fallback;
    }
    double out = fallback;
    if (!parse_double(v->tokens[0], out)) {
      add(path + ": '" + v->tokens[0] + "' is not a number");
      return fallback;
    }
    return out;
  }

  std::vector<double> number_list(const ConfigNode* parent,
                                  const std::string& parent_path,
                                  const std::string& name) {
    std::vector<double> out;
    const ConfigValue* v = value(parent, parent_path, name);
    if (v == nullptr) return out;
    const std::string path = join(parent_path, name);
    for (const std::string& tok : v->tokens) {
      double x = 0.0;
      if (!parse_double(tok, x)) {
        add(path + ": '" + tok + "' is not a number");
        return {};
      }
      out.push_back(x);
    }
    return out;
  }

  std::int64_t integer(const ConfigNode* parent,
                       const std::string& parent_path,
                       const std::string& name, std::int64_t fallback) {
    const ConfigValue* v = value(parent, parent_path, name);
    if (v == nullptr) return fallback;
    const std::string path = join(parent_path, name);
    if (v->tokens.size() != 1) {
      add(path + ": expected exactly one integer");
      return fallback;
    }
    std::int64_t out = fallback;
    if (!parse_int(v->tokens[0], out)) {
      add(path + ": '" + v->tokens[0] + "' is not an integer");
      return fallback;
    }
    return out;
  }

  std::vector<std::int64_t> integer_list(const ConfigNode* parent,
                                         const std::string& parent_path,
                                         const std::string& name) {
    std::vector<std::int64_t> out;
    const ConfigValue* v = value(parent, parent_path, name);
    if (v == nullptr) return out;
    const std::string path = join(parent_path, name);
    for (const std::string& tok : v->tokens) {
      std::int64_t x = 0;
      if (!parse_int(tok, x)) {
        add(path + ": '" + tok + "' is not an integer");
        return {};
      }
      out.push_back(x);
    }
    return out;
  }

  std::uint64_t unsigned64(const ConfigNode* parent,
                           const std::string& parent_path,
                           const std::string& name, std::uint64_t fallback) {
    const ConfigValue* v = value(parent, parent_path, name);
    if (v == nullptr) return fallback;
    const std::string path = join(parent_path, name);
    if (v->tokens.size() != 1) {
      add(path + ": expected exactly one unsigned integer");
      return fallback;
    }
    const std::string& tok = v->tokens[0];
    if (tok.empty() || tok[0] == '-') {
      add(path + ": '" + tok + "' is not an unsigned integer");
      return fallback;
    }
    errno = 0;
    char* end = nullptr;
    const unsigned long long x = std::strtoull(tok.c_str(), &end, 10);
    if (errno != 0 || end == tok.c_str() || *end != '\0') {
      add(path + ": '" + tok + "' is not an unsigned integer");
      return fallback;
    }
    return static_cast<std::uint64_t>(x);
  }

  bool boolean(const ConfigNode* parent, const std::string& parent_path,
               const std::string& name, bool fallback) {
    const ConfigValue* v = value(parent, parent_path, name);
    if (v == nullptr) return fallback;
    const std::string path = join(parent_path, name);
    if (v->tokens.size() != 1 ||
        (v->tokens[0] != "true" && v->tokens[0] != "false")) {
      add(path + ": expected true or false");
      return fallback;
    }
    return v->tokens[0] == "true";
  }

  std::string word(const ConfigNode* parent, const std::string& parent_path,
                   const std::string& name, const std::string& fallback) {
    const ConfigValue* v = value(parent, parent_path, name);
    if (v == nullptr) return fallback;
    const std::string path = join(parent_path, name);
    if (v->tokens.size() != 1) {
      add(path + ": expected exactly one word");
      return fallback;
    }
    return v->tokens[0];
  }

  void add(const std::string& diag) { diags_->push_back(diag); }

  // Every path not consumed by the schema is unknown.
  void report_unknown() const { walk(*root_, ""); }

  static std::string join(const std::string& parent,
                          const std::string& name) {
    return parent.empty() ? name : parent + "." + name;
  }

 private:
  static bool parse_double(const std::string& tok, double& out) {
    if (tok.empty()) return false;
    errno = 0;
    char* end = nullptr;
    const double x = std::strtod(tok.c_str(), &end);
    if (errno != 0 || end == tok.c_str() || *end != '\0') return false;
    out = x;
    return true;
  }

  static bool parse_int(const std::string& tok, std::int64_t& out) {
    if (tok.empty()) return false;
    errno = 0;
    char* end = nullptr;
    const long long x = std::strtoll(tok.c_str(), &end, 10);
    if (errno != 0 || end == tok.c_str() || *end != '\0') return false;
    out = static_cast<std::int64_t>(x);
    return true;
  }

  void walk(const ConfigNode& node, const std::string& path) const {
    for (const auto& [name, value] : node.values) {
      const std::string full = join(path, name);
      if (!visited_.count(full)) {
        diags_->push_back(full + ": unknown key");
      }
    }
    for (const auto& [name, child] : node.sections) {
      const std::string full = join(path, name);
      if (!visited_.count(full)) {
        diags_->push_back(full + ": unknown section");
      } else {
        walk(child, full);
      }
    }
  }

  const ConfigNode* root_;
  std::vector<std::string>* diags_;
  std::set<std::string> visited_;
};

MmbpParams bind_arrival(Binder& b, const ConfigNode* arrivals,
                        const std::string& path, const std::string& name,
                        std::vector<std::string>& diags) {
  MmbpParams p;
  const ConfigNode* node = b.section(arrivals, path, name);
  const std::string full = Binder::join(path, name);
  p.lambda = b.number(node, full, "lambda", p.lambda);
  p.beta = b.number(node, full, "beta", p.beta);
  if (!(p.lambda >= 0.0 && p.lambda <= 1.0)) {
    diags.push_back(full + ".lambda: must lie in [0, 1]");
  }
  if (!(p.beta >= 0.0 && p.beta <= 1.0)) {
    diags.push_back(full + ".beta: must lie in [0, 1]");
  }
  return p;
}

ChannelParams bind_channel(Binder& b, const ConfigNode* channels,
                           const std::string& path, const std::string& name,
                           std::vector<std::string>& diags) {
  ChannelParams p;
  const ConfigNode* node = b.section(channels, path, name);
  const std::string full = Binder::join(path, name);
  p.gamma = b.number(node, full, "gamma", p.gamma);
  p.q = b.number(node, full, "q", p.q);
  if (!(p.gamma >= 0.0 && p.gamma <= 1.0)) {
    diags.push_back(full + ".gamma: must lie in [0, 1]");
  }
  if (!(p.q >= 0.0 && p.q <= 1.0)) {
    diags.push_back(full + ".q: must lie in [0, 1]");
  }
  return p;
}

int bind_capacity(Binder& b, const ConfigNode* caps, const std::string& name,
                  std::vector<std::string>& diags) {
  const std::int64_t v =
      b.integer(caps, "model.capacity", name, 20);
  if (v < 1 || v > 1000000) {
    diags.push_back("model.capacity." + name + ": must lie in [1, 1000000]");
    return 20;
  }
  return static_cast<int>(v);
}

}  // namespace

ConfigLoadResult bind_experiment_config(const ConfigNode& root) {
  ConfigLoadResult result;
  std::vector<std::string>& diags = result.diagnostics;
  ExperimentConfig& cfg = result.config;
  Binder b(root, diags);

  const std::int64_t schema = b.integer(&root, "", "schema_version", -1);
  if (schema != 1) {
    diags.push_back("schema_version: expected 1");
  }

  const ConfigNode* model = b.section(&root, "", "model");
  const ConfigNode* caps = b.section(model, "model", "capacity");
  cfg.model.capacity.p = bind_capacity(b, caps, "p", diags);
  cfg.model.capacity.pe = bind_capacity(b, caps, "pe", diags);
  cfg.model.capacity.s = bind_capacity(b, caps, "s", diags);
  cfg.model.capacity.ps = bind_capacity(b, caps, "ps", diags);
  cfg.model.capacity.se = bind_capacity(b, caps, "se", diags);

  const ConfigNode* arrivals = b.section(model, "model", "arrival");
  cfg.model.arrival_p = bind_arrival(b, arrivals, "model.arrival", "p", diags);
  cfg.model.arrival_pe =
      bind_arrival(b, arrivals, "model.arrival", "pe", diags);
  cfg.model.arrival_s = bind_arrival(b, arrivals, "model.arrival", "s", diags);
  cfg.model.arrival_se =
      bind_arrival(b, arrivals, "model.arrival", "se", diags);

  const ConfigNode* channels = b.section(model, "model", "channel");
  cfg.model.channel_p = bind_channel(b, channels, "model.channel", "p", diags);
  cfg.model.channel_s = bind_channel(b, channels, "model.channel", "s", diags);
  cfg.model.channel_ps =
      bind_channel(b, channels, "model.channel", "ps", diags);
  cfg.model.channel_sp =
      bind_channel(b, channels, "model.channel", "sp", diags);
  cfg.model.pu_decodes_during_accept =
      b.boolean(model, "model", "pu_decodes_during_accept",
                cfg.model.pu_decodes_during_accept);

  const ConfigNode* reward = b.section(&root, "", "reward");
  cfg.penalty_k = b.number(reward, "reward", "penalty", cfg.penalty_k);
  if (!(cfg.penalty_k >= 0.0)) {
    diags.push_back("reward.penalty: must be >= 0");
  }
  cfg.omegas = b.number_list(reward, "reward", "omega");
  if (reward != nullptr && cfg.omegas.empty()) {
    diags.push_back("reward.omega: needs at least one value");
  }
  for (double w : cfg.omegas) {
    if (!(w >= 0.0 && w <= 1.0)) {
      diags.push_back("reward.omega: values must lie in [0, 1]");
      break;
    }
  }
  cfg.a2_penalty_uses_ps_link =
      b.boolean(reward, "reward", "a2_penalty_uses_ps_link",
                cfg.a2_penalty_uses_ps_link);

  const ConfigNode* quant = b.section(&root, "", "quantizer");
  const std::int64_t levels = b.integer(quant, "quantizer", "levels", 4);
  if (levels < 2 || levels > 64) {
    diags.push_back("quantizer.levels: must lie in [2, 64]");
    cfg.n_levels = 4;
  } else {
    cfg.n_levels = static_cast<int>(levels);
  }
  cfg.thresholds.clear();
  if (quant != nullptr) {
    const std::vector<std::int64_t> th =
        b.integer_list(quant, "quantizer", "thresholds");
    for (std::int64_t v : th) cfg.thresholds.push_back(static_cast<int>(v));
    if (static_cast<int>(th.size()) != cfg.n_levels - 2) {
      diags.push_back(
          "quantizer.thresholds: needs exactly levels-2 values (empty list "
          "for levels=2)");
    } else {
      int prev = 0;
      for (int v : cfg.thresholds) {
        if (v <= prev) {
          diags.push_back(
              "quantizer.thresholds: must be strictly increasing and >= 1");
          break;
        }
        prev = v;
      }
      if (!cfg.thresholds.empty()) {
        const int top = cfg.thresholds.back();
        if (top >= cfg.model.capacity.s || top >= cfg.model.capacity.ps ||
            top >= cfg.model.capacity.se) {
          diags.push_back(
              "quantizer.thresholds: largest threshold must be below the "
              "s/ps/se queue capacities");
        }
      }
    }
  }

  const ConfigNode* learn = b.section(&root, "", "learning");
  cfg.hyper.alpha = b.number(learn, "learning", "alpha", cfg.hyper.alpha);
  cfg.hyper.gamma = b.number(learn, "learning", "gamma", cfg.hyper.gamma);
  cfg.hyper.mu = b.number(learn, "learning", "mu", cfg.hyper.mu);
  cfg.hyper.horizon =
      b.unsigned64(learn, "learning", "train_horizon", cfg.hyper.horizon);
  cfg.hyper.curve_window =
      b.unsigned64(learn, "learning", "curve_window", cfg.hyper.curve_window);
  if (!(cfg.hyper.alpha > 0.0 && cfg.hyper.alpha <= 1.0)) {
    diags.push_back("learning.alpha: must lie in (0, 1]");
  }
  if (!(cfg.hyper.gamma >= 0.0 && cfg.hyper.gamma < 1.0)) {
    diags.push_back(
        "learning.gamma: must lie in [0, 1); the discounted sum diverges at "
        "1");
  }
  if (!(cfg.hyper.mu >= 0.0 && cfg.hyper.mu <= 1.0)) {
    diags.push_back("learning.mu: must lie in [0, 1]");
  }
  if (cfg.hyper.horizon < 1) {
    diags.push_back("learning.train_horizon: must be >= 1");
  }
  if (cfg.hyper.curve_window < 1) {
    diags.push_back("learning.curve_window: must be >= 1");
  }

  const ConfigNode* sweep = b.section(&root, "", "sweep");
  cfg.grid.lambda_min =
      b.number(sweep, "sweep", "lambda_p_min", cfg.grid.lambda_min);
  cfg.grid.lambda_max =
      b.number(sweep, "sweep", "lambda_p_max", cfg.grid.lambda_max);
  const std::int64_t points =
      b.integer(sweep, "sweep", "grid_points", cfg.grid.points);
  const std::int64_t reps =
      b.integer(sweep, "sweep", "replications", cfg.replications);
  cfg.eval_horizon =
      b.unsigned64(sweep, "sweep", "eval_horizon", cfg.eval_horizon);
  cfg.base_seed = b.unsigned64(sweep, "sweep", "base_seed", cfg.base_seed);
  const std::string mode_word =
      b.word(sweep, "sweep", "mode", to_string(cfg.mode));
  if (!(cfg.grid.lambda_min >= 0.0 && cfg.grid.lambda_max <= 1.0 &&
        cfg.grid.lambda_min <= cfg.grid.lambda_max)) {
    diags.push_back(
        "sweep.lambda_p_min/lambda_p_max: must satisfy 0 <= min <= max <= 1");
  }
  if (points < 1 || points > 10000) {
    diags.push_back("sweep.grid_points: must lie in [1, 10000]");
  } else {
    cfg.grid.points = static_cast<int>(points);
  }
  if (reps < 1 || reps > 10000) {
    diags.push_back("sweep.replications: must lie in [1, 10000]");
  } else {
    cfg.replications = static_cast<int>(reps);
  }
  if (cfg.eval_horizon < 1) {
    diags.push_back("sweep.eval_horizon: must be >= 1");
  }
  try {
    cfg.mode = parse_mode(mode_word);
  } catch (const std::invalid_argument& e) {
    diags.push_back("sweep.mode: " + std::string(e.what()));
  }

  const ConfigNode* oracle = b.section(&root, "", "oracle");
  const std::int64_t ocap =
      b.integer(oracle, "oracle", "capacity", cfg.oracle.capacity);
  const std::int64_t olevels =
      b.integer(oracle, "oracle", "levels", cfg.oracle.levels);
  cfg.oracle.tolerance =
      b.number(oracle, "oracle", "tolerance", cfg.oracle.tolerance);
  const std::uint64_t ceil = b.unsigned64(oracle, "oracle", "state_ceiling",
                                          cfg.oracle.state_ceiling);
  cfg.oracle.eval_horizon = b.unsigned64(oracle, "oracle", "eval_horizon",
                                         cfg.oracle.eval_horizon);
  const std::int64_t oseeds =
      b.integer(oracle, "oracle", "eval_seeds", cfg.oracle.eval_seeds);
  if (ocap < 1 || ocap > 1000) {
    diags.push_back("oracle.capacity: must lie in [1, 1000]");
  } else {
    cfg.oracle.capacity = static_cast<int>(ocap);
  }
  if (olevels < 2 || olevels > 64) {
    diags.push_back("oracle.levels: must lie in [2, 64]");
  } else {
    cfg.oracle.levels = static_cast<int>(olevels);
  }
  if (!(cfg.oracle.tolerance > 0.0)) {
    diags.push_back("oracle.tolerance: must be > 0");
  }
  cfg.oracle.state_ceiling = static_cast<std::size_t>(ceil);
  if (cfg.oracle.state_ceiling < 1) {
    diags.push_back("oracle.state_ceiling: must be >= 1");
  }
  if (cfg.oracle.eval_horizon < 1) {
    diags.push_back("oracle.eval_horizon: must be >= 1");
  }
  if (oseeds < 1 || oseeds > 1000) {
    diags.push_back("oracle.eval_seeds: must lie in [1, 1000]");
  } else {
    cfg.oracle.eval_seeds = static_cast<int>(oseeds);
  }

  b.report_unknown();
  return result;
}

ConfigLoadResult load_experiment_config_text(const std::string& text) {
  return bind_experiment_config(parse_config_text(text));
}

ConfigLoadResult load_experiment_config(const std::string& path) {
  return load_experiment_config_text(read_text_file(path));
}

}  // namespace cogrelay
