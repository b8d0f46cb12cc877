#include "ekms/cli/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "ekms/error.hpp"

namespace ekms::cli {

Subcommand parse_subcommand(const std::string& name) {
  if (name == "tba") return Subcommand::Tba;
  if (name == "edchain") return Subcommand::EdChain;
  if (name == "cft") return Subcommand::Cft;
  if (name == "hydro") return Subcommand::Hydro;
  if (name == "checks") return Subcommand::Checks;
  throw Error(ErrorCode::ConfigError, "unknown subcommand '" + name + "'");
}

std::string to_string(Subcommand s) {
  switch (s) {
    case Subcommand::Tba: return "tba";
    case Subcommand::EdChain: return "edchain";
    case Subcommand::Cft: return "cft";
    case Subcommand::Hydro: return "hydro";
    case Subcommand::Checks: return "checks";
  }
  return "?";
}

namespace {

class Reader {
 public:
  explicit Reader(std::string origin) : origin_(std::move(origin)) {}

  [[noreturn]] void fail(const YAML::Node& node, const std::string& msg) const {
    const YAML::Mark m = node.Mark();
    std::ostringstream out;
    out << origin_ << ':' << (m.line + 1) << ':' << (m.column + 1) << ": " << msg;
    throw Error(ErrorCode::ConfigError, out.str());
  }

  template <class T>
  T scalar(const YAML::Node& node, const std::string& key) const {
    if (!node.IsScalar()) fail(node, "'" + key + "' must be a scalar");
    try {
      return node.as<T>();
    } catch (const YAML::Exception&) {
      fail(node, "'" + key + "' has an invalid value '" + node.Scalar() + "'");
    }
  }

  template <class T>
  std::vector<T> list(const YAML::Node& node, const std::string& key) const {
    if (!node.IsSequence()) fail(node, "'" + key + "' must be a list");
    std::vector<T> out;
    for (const auto& item : node) out.push_back(scalar<T>(item, key));
    return out;
  }

  void keys(const YAML::Node& map, const std::string& section, const std::set<std::string>& allowed) const {
    if (!map.IsMap()) fail(map, "'" + section + "' must be a mapping");
    for (const auto& kv : map) {
      const auto key = kv.first.as<std::string>();
      if (!allowed.count(key)) fail(kv.first, "unknown key '" + key + "' in " + section);
    }
  }

 private:
  std::string origin_;
};

template <class T>
void take(const Reader& r, const YAML::Node& map, const char* key, T& dst) {
  if (auto n = map[key]) dst = r.scalar<T>(n, key);
}

template <class T>
void take_list(const Reader& r, const YAML::Node& map, const char* key, std::vector<T>& dst) {
  if (auto n = map[key]) dst = r.list<T>(n, key);
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& origin, RunConfig cfg) {
  Reader r(origin);
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    std::ostringstream out;
    out << origin << ':' << (e.mark.line + 1) << ':' << (e.mark.column + 1) << ": " << e.msg;
    throw Error(ErrorCode::ConfigError, out.str());
  }
  if (root.IsNull()) return cfg;
  r.keys(root, "top level",
         {"subcommand", "backend", "checks", "tolerances", "out", "seed", "samples", "beta", "tba", "cft", "edchain",
          "hydro"});

  if (auto n = root["subcommand"]) {
    try {
      cfg.subcommand = parse_subcommand(r.scalar<std::string>(n, "subcommand"));
    } catch (const Error&) {
      r.fail(n, "unknown subcommand '" + n.Scalar() + "'");
    }
  }
  take(r, root, "backend", cfg.backend);
  take_list(r, root, "checks", cfg.checks);
  take(r, root, "out", cfg.out);
  take(r, root, "seed", cfg.seed);
  take(r, root, "samples", cfg.samples);
  if (auto n = root["beta"]) {
    try {
      cfg.beta = PotentialVector::parse(r.scalar<std::string>(n, "beta"));
    } catch (const Error& e) {
      r.fail(n, e.what());
    }
  }
  if (auto n = root["tolerances"]) {
    if (!n.IsMap()) r.fail(n, "'tolerances' must be a mapping");
    for (const auto& kv : n) cfg.tolerances[kv.first.as<std::string>()] = r.scalar<double>(kv.second, "tolerances");
  }
  if (auto t = root["tba"]) {
    r.keys(t, "tba", {"model", "c", "a", "charges", "nodes", "cutoff", "tol", "damping", "max_iters"});
    take(r, t, "model", cfg.tba.model);
    take(r, t, "c", cfg.tba.c);
    take(r, t, "a", cfg.tba.a);
    take_list(r, t, "charges", cfg.tba.charges);
    take(r, t, "nodes", cfg.tba.nodes);
    take(r, t, "cutoff", cfg.tba.cutoff);
    take(r, t, "tol", cfg.tba.tol);
    take(r, t, "damping", cfg.tba.damping);
    take(r, t, "max_iters", cfg.tba.max_iters);
  }
  if (auto c = root["cft"]) {
    r.keys(c, "cft", {"d", "beta_rest", "theta", "kappa"});
    take(r, c, "d", cfg.cft.d);
    take(r, c, "beta_rest", cfg.cft.beta_rest);
    take(r, c, "theta", cfg.cft.theta);
    take(r, c, "kappa", cfg.cft.kappa);
  }
  if (auto e = root["edchain"]) {
    r.keys(e, "edchain", {"N", "charges", "scan", "pairs", "fluxes"});
    take(r, e, "N", cfg.chain.N);
    take_list(r, e, "charges", cfg.chain.charges);
    take_list(r, e, "scan", cfg.chain.scan);
    take(r, e, "pairs", cfg.chain.pairs);
    take(r, e, "fluxes", cfg.chain.fluxes);
  }
  if (auto h = root["hydro"]) {
    r.keys(h, "hydro",
           {"backend", "cells", "length", "dt", "t_end", "scheme", "beta_bar", "mu_bar", "refinements", "initial",
            "amplitude", "record_every", "fields"});
    take(r, h, "backend", cfg.hydro.backend);
    take(r, h, "cells", cfg.hydro.cells);
    take(r, h, "length", cfg.hydro.length);
    take(r, h, "dt", cfg.hydro.dt);
    take(r, h, "t_end", cfg.hydro.t_end);
    take(r, h, "scheme", cfg.hydro.scheme);
    take(r, h, "beta_bar", cfg.hydro.beta_bar);
    take(r, h, "mu_bar", cfg.hydro.mu_bar);
    take(r, h, "refinements", cfg.hydro.refinements);
    take(r, h, "initial", cfg.hydro.initial);
    take(r, h, "amplitude", cfg.hydro.amplitude);
    take(r, h, "record_every", cfg.hydro.record_every);
    if (auto f = h["fields"]) {
      if (!f.IsMap()) r.fail(f, "'fields' must map charge labels to primitive lists");
      cfg.hydro.fields.clear();
      for (const auto& kv : f) {
        const auto k = r.scalar<ChargeIndex>(kv.first, "fields");
        if (kv.second.IsScalar())
          cfg.hydro.fields[k] = {kv.second.as<std::string>()};
        else
          cfg.hydro.fields[k] = r.list<std::string>(kv.second, "fields");
      }
    }
  }
  return cfg;
}

RunConfig load_config(const std::string& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, path + ": cannot open config file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path, std::move(base));
}

std::pair<std::string, double> parse_tolerance(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) throw Error(ErrorCode::ConfigError, "--tol expects NAME=VALUE, got '" + text + "'");
  try {
    std::size_t used = 0;
    const std::string rhs = text.substr(eq + 1);
    const double v = std::stod(rhs, &used);
    if (used != rhs.size() || !(v > 0.0)) throw std::invalid_argument("bad");
    return {text.substr(0, eq), v};
  } catch (const std::exception&) {
    throw Error(ErrorCode::ConfigError, "--tol value in '" + text + "' is not a positive number");
  }
}

}  // namespace ekms::cli
