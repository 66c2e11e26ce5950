#include "mcflow/config.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <set>
#include <sstream>

#include <Eigen/Core>

#ifndef MCFLOW_VERSION
#define MCFLOW_VERSION "0.0.0"
#endif

namespace mcflow {

namespace {

namespace fs = std::filesystem;

Complex point_of(const Json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw Error("config.invalid_value", path + " must be [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

Circle circle_of(Record r) {
  Circle c;
  c.center = point_of(r.raw("center"), r.path() + ".center");
  c.radius = r.number("radius", 0.0);
  if (!(c.radius > 0.0)) throw Error("config.invalid_value", r.path() + ".radius must be positive");
  r.finish();
  return c;
}

SmoothCurve curve_of(const Json& j, const std::string& path, bool strict) {
  Record r(j, path, strict);
  SmoothCurve curve;
  int kinds = 0;
  if (r.has("samples")) {
    const Json& s = r.raw("samples");
    if (!s.is_array() || s.size() < 8) throw Error("config.invalid_value", path + ".samples needs at least 8 points");
    std::vector<Complex> pts;
    for (std::size_t k = 0; k < s.size(); ++k) pts.push_back(point_of(s[k], path + ".samples"));
    curve = SmoothCurve(pts);
    ++kinds;
  }
  if (r.has("circle")) {
    const Circle c = circle_of(r.child("circle"));
    curve = SmoothCurve::circle(c.center, c.radius, 256);
    ++kinds;
  }
  if (r.has("ellipse")) {
    Record e = r.child("ellipse");
    const Complex center = point_of(e.raw("center"), e.path() + ".center");
    const Json& axes = e.raw("axes");
    const Complex ab = point_of(axes, e.path() + ".axes");
    const double rotation = e.number("rotation", 0.0);
    e.finish();
    if (!(ab.real() > 0.0 && ab.imag() > 0.0)) throw Error("config.invalid_value", e.path() + ".axes must be positive");
    const Complex turn = std::polar(1.0, rotation);
    curve = SmoothCurve::from_function(
        [&](double t) { return center + turn * Complex(ab.real() * std::cos(t), ab.imag() * std::sin(t)); }, 256);
    ++kinds;
  }
  r.finish();
  if (kinds != 1) throw Error("config.invalid_value", path + " needs exactly one of samples, circle, ellipse");
  return curve;
}

Json point_json(Complex z) { return Json::array({z.real(), z.imag()}); }

const char* preset_name(InitialPreset p) {
  switch (p) {
    case InitialPreset::Rest: return "rest";
    case InitialPreset::SteadyFamily: return "steady-family";
    case InitialPreset::PerturbedSteady: return "perturbed-steady";
    case InitialPreset::RandomSlip: return "random-slip";
  }
  return "rest";
}

InitialPreset preset_of(const std::string& s) {
  if (s == "rest") return InitialPreset::Rest;
  if (s == "steady-family") return InitialPreset::SteadyFamily;
  if (s == "perturbed-steady") return InitialPreset::PerturbedSteady;
  if (s == "random-slip") return InitialPreset::RandomSlip;
  throw Error("config.invalid_value", "initial.preset must be rest, steady-family, perturbed-steady or random-slip");
}

void put_le(std::ostream& out, std::uint64_t v, int bytes) {
  for (int b = 0; b < bytes; ++b) out.put(static_cast<char>((v >> (8 * b)) & 0xff));
}

std::uint64_t get_le(std::istream& in, int bytes) {
  std::uint64_t v = 0;
  for (int b = 0; b < bytes; ++b) {
    const int c = in.get();
    if (c == EOF) throw Error("config.invalid_dump", "truncated grid dump");
    v |= std::uint64_t(static_cast<unsigned char>(c)) << (8 * b);
  }
  return v;
}

constexpr char kMagic[8] = {'M', 'C', 'F', 'L', 'O', 'W', 'G', '1'};

}  // namespace

Json parse_json(const std::string& text, bool strict) {
  std::vector<std::set<std::string>> keys;
  std::string duplicate;
  auto callback = [&](int /*depth*/, Json::parse_event_t event, Json& parsed) {
    if (!strict) return true;
    switch (event) {
      case Json::parse_event_t::object_start: keys.emplace_back(); break;
      case Json::parse_event_t::object_end: keys.pop_back(); break;
      case Json::parse_event_t::key: {
        const auto key = parsed.get<std::string>();
        if (!keys.back().insert(key).second && duplicate.empty()) duplicate = key;
        break;
      }
      default: break;
    }
    return true;
  };
  Json j;
  try {
    j = Json::parse(text, callback);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error("config.parse_error", e.what());
  }
  if (!duplicate.empty()) throw Error("config.duplicate_key", "key '" + duplicate + "' appears twice");
  return j;
}

Json load_json(const fs::path& path, bool strict) {
  if (!fs::exists(path)) throw Error("config.missing_file", path.string() + " does not exist");
  std::ifstream in(path);
  if (!in) throw Error("config.missing_file", path.string() + " is not readable");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_json(ss.str(), strict);
}

Record::Record(const Json& object, std::string path, bool strict)
    : object_(&object), path_(std::move(path)), strict_(strict) {
  if (!object.is_object()) throw Error("config.invalid_value", path_ + " must be an object");
}

bool Record::has(const std::string& key) const { return object_->contains(key); }

const Json& Record::at(const std::string& key, Json::value_t type, const char* type_name) {
  used_.push_back(key);
  const Json& v = (*object_)[key];
  const bool ok = type == Json::value_t::number_float ? v.is_number()
                  : type == Json::value_t::number_integer ? v.is_number_integer()
                  : type == Json::value_t::number_unsigned ? v.is_number_unsigned()
                                                           : v.type() == type;
  if (!ok) throw Error("config.invalid_value", path_ + "." + key + " must be " + type_name);
  return v;
}

double Record::number(const std::string& key, double fallback) {
  if (!has(key)) return fallback;
  return at(key, Json::value_t::number_float, "a number").get<double>();
}

int Record::integer(const std::string& key, int fallback) {
  if (!has(key)) return fallback;
  return at(key, Json::value_t::number_integer, "an integer").get<int>();
}

std::uint64_t Record::unsigned_integer(const std::string& key, std::uint64_t fallback) {
  if (!has(key)) return fallback;
  return at(key, Json::value_t::number_unsigned, "a non-negative integer").get<std::uint64_t>();
}

bool Record::boolean(const std::string& key, bool fallback) {
  if (!has(key)) return fallback;
  return at(key, Json::value_t::boolean, "true or false").get<bool>();
}

std::string Record::string(const std::string& key, const std::string& fallback) {
  if (!has(key)) return fallback;
  return at(key, Json::value_t::string, "a string").get<std::string>();
}

const Json& Record::raw(const std::string& key) {
  if (!has(key)) throw Error("config.missing_key", path_ + "." + key + " is required");
  used_.push_back(key);
  return (*object_)[key];
}

Record Record::child(const std::string& key) { return Record(raw(key), path_ + "." + key, strict_); }

void Record::finish() const {
  if (!strict_) return;
  for (const auto& [key, value] : object_->items())
    if (std::find(used_.begin(), used_.end(), key) == used_.end())
      throw Error("config.unknown_key", "unknown key " + path_ + "." + key);
}

DomainSpec parse_domain(const Json& j, bool strict) {
  Record r(j, "domain", strict);
  if (r.has("curves")) {
    const Json& curves = r.raw("curves");
    r.finish();
    if (!curves.is_array() || curves.empty()) throw Error("config.invalid_value", "domain.curves must be a non-empty list");
    SmoothCurve outer = curve_of(curves[0], "domain.curves[0]", strict);
    std::vector<SmoothCurve> holes;
    for (std::size_t k = 1; k < curves.size(); ++k)
      holes.push_back(curve_of(curves[k], "domain.curves[" + std::to_string(k) + "]", strict));
    return SmoothDomain(std::move(outer), std::move(holes));
  }
  const Circle outer = r.has("outer") ? circle_of(r.child("outer")) : Circle{0.0, 1.0};
  std::vector<Circle> holes;
  if (r.has("holes")) {
    const Json& list = r.raw("holes");
    if (!list.is_array()) throw Error("config.invalid_value", "domain.holes must be a list");
    for (std::size_t k = 0; k < list.size(); ++k)
      holes.push_back(circle_of(Record(list[k], "domain.holes[" + std::to_string(k) + "]", strict)));
  }
  r.finish();
  return CircularDomain(outer, std::move(holes));
}

DomainSpec resolve_domain(const std::string& name, bool strict) {
  if (name == "annulus") return CircularDomain::annulus(0.5);
  if (name.rfind("annulus:", 0) == 0) {
    double r = 0.0;
    try {
      r = std::stod(name.substr(8));
    } catch (const std::exception&) {
      throw Error("config.invalid_value", "annulus:<r> needs a number");
    }
    return CircularDomain::annulus(r);
  }
  if (name == "disc") return CircularDomain::unit_disc();
  if (name == "eccentric") return CircularDomain({{Complex(0.2, 0.0), 0.3}});
  if (name == "symmetric") return CircularDomain({{Complex(0.4, 0.0), 0.15}, {Complex(-0.4, 0.0), 0.15}});
  if (name == "three-holes")
    return CircularDomain({{Complex(0.4, 0.0), 0.15}, {Complex(-0.4, 0.0), 0.15}, {Complex(0.05, 0.55), 0.12}});
  if (name == "four-connected")
    return CircularDomain({{Complex(-0.45, 0.0), 0.15}, {Complex(0.4, 0.25), 0.12}, {Complex(0.3, -0.4), 0.1}});
  return parse_domain(load_json(name, strict), strict);
}

CircularDomain require_circular(const DomainSpec& d) {
  if (const auto* c = std::get_if<CircularDomain>(&d)) return *c;
  throw Error("config.unsupported_domain", "this command needs a circular domain");
}

Json domain_to_json(const DomainSpec& d) {
  Json j;
  if (const auto* c = std::get_if<CircularDomain>(&d)) {
    j["outer"] = {{"center", point_json(0.0)}, {"radius", 1.0}};
    j["holes"] = Json::array();
    for (const Circle& h : c->holes()) j["holes"].push_back({{"center", point_json(h.center)}, {"radius", h.radius}});
    return j;
  }
  const auto& s = std::get<SmoothDomain>(d);
  j["curves"] = Json::array();
  for (std::size_t k = 0; k < s.num_components(); ++k) {
    Json pts = Json::array();
    for (const Complex z : s.curve(k).samples()) pts.push_back(point_json(z));
    j["curves"].push_back({{"samples", pts}});
  }
  return j;
}

SimulateConfig parse_simulate_config(const Json& j, const fs::path& base_dir, bool strict) {
  Record r(j, "config", strict);
  SimulateConfig out;
  SimulationConfig& c = out.polar;

  DomainSpec domain = CircularDomain::annulus(0.5);
  if (r.has("domain")) {
    const Json& d = r.raw("domain");
    if (d.is_string()) {
      const std::string name = d.get<std::string>();
      const bool preset = name == "annulus" || name.rfind("annulus:", 0) == 0 || name == "disc" ||
                          name == "eccentric" || name == "symmetric" || name == "three-holes" ||
                          name == "four-connected";
      domain = resolve_domain(preset ? name : (base_dir / name).string(), strict);
    } else {
      domain = parse_domain(d, strict);
    }
  }
  const CircularDomain circ = require_circular(domain);
  if (circ.num_holes() == 0) throw Error("config.unsupported_domain", "the solver needs at least one hole");
  out.masked = !circ.is_concentric_annulus();
  if (!out.masked) c.inner_radius = circ.holes()[0].radius;

  c.resolution = r.integer("resolution", out.masked ? 48 : 32);
  if (c.resolution < 4) throw Error("config.invalid_value", "resolution must be at least 4");

  if (r.has("params")) {
    Record p = r.child("params");
    c.params.mu = p.number("mu", c.params.mu);
    c.params.beta = p.number("beta", c.params.beta);
    c.params.gamma = p.number("gamma", c.params.gamma);
    p.finish();
  }
  c.allow_parameter_override = r.boolean("allow_parameter_override", false);
  if (!(c.params.mu > 0.0)) throw Error("config.invalid_parameters", "mu must be positive");
  if (!(c.params.beta > 4.0 / 3.0 && c.params.gamma > 1.0) && !c.allow_parameter_override)
    throw Error("config.invalid_parameters", "the theory needs beta > 4/3, gamma > 1; got beta = " +
                                                 format_double(c.params.beta) + ", gamma = " +
                                                 format_double(c.params.gamma) +
                                                 " (set allow_parameter_override to run anyway)");

  std::vector<double> friction(circ.num_components(), 0.0);
  if (r.has("friction")) {
    const Json& f = r.raw("friction");
    if (f.is_number()) {
      std::fill(friction.begin(), friction.end(), f.get<double>());
    } else if (f.is_array() && f.size() == friction.size()) {
      for (std::size_t k = 0; k < f.size(); ++k) {
        if (!f[k].is_number()) throw Error("config.invalid_value", "friction entries must be numbers");
        friction[k] = f[k].get<double>();
      }
    } else {
      throw Error("config.invalid_value", "friction must be a number or one number per boundary component");
    }
  }
  for (double k : friction)
    if (k < 0.0) throw Error("config.invalid_value", "friction must be non-negative");
  c.k_outer = friction[0];
  c.k_inner = friction.size() > 1 ? friction[1] : 0.0;

  out.seed = r.unsigned_integer("seed", 1);
  std::string preset = out.masked ? "rest" : "random-slip";
  if (r.has("initial")) {
    Record in = r.child("initial");
    preset = in.string("preset", preset);
    c.initial.rho_hat = in.number("rho_hat", c.initial.rho_hat);
    c.initial.c1 = in.number("c1", c.initial.c1);
    c.initial.c2 = in.number("c2", c.initial.c2);
    c.initial.density_amplitude = in.number("density_amplitude", c.initial.density_amplitude);
    c.initial.velocity_amplitude = in.number("velocity_amplitude", c.initial.velocity_amplitude);
    c.initial.modes = in.integer("modes", c.initial.modes);
    in.finish();
  }
  if (out.masked) {
    if (preset != "rest" && preset != "swirl")
      throw Error("config.invalid_value", "on general circular domains initial.preset must be rest or swirl");
  } else {
    c.initial.preset = preset_of(preset);
  }
  c.initial.seed = static_cast<unsigned>(out.seed & 0xffffffffu);
  if (!(c.initial.rho_hat > 0.0)) throw Error("config.invalid_value", "initial.rho_hat must be positive");

  c.final_time = r.number("final_time", c.final_time);
  c.cadence = r.number("cadence", c.cadence);
  c.safety = r.number("safety", c.safety);
  if (!(c.final_time > 0.0) || !(c.cadence > 0.0)) throw Error("config.invalid_value", "final_time and cadence must be positive");
  if (!(c.safety > 0.0 && c.safety <= 1.0)) throw Error("config.invalid_value", "safety must lie in (0, 1]");

  if (r.has("scheme")) {
    Record s = r.child("scheme");
    c.muscl = s.boolean("muscl", c.muscl);
    c.implicit_viscosity = s.boolean("implicit_viscosity", c.implicit_viscosity);
    c.floor_factor = s.number("floor_factor", c.floor_factor);
    c.band_constant = s.number("band_constant", c.band_constant);
    s.finish();
  }
  if (r.has("output")) {
    Record o = r.child("output");
    out.snapshots = o.string("snapshots", out.snapshots);
    o.finish();
  }
  if (out.snapshots != "none" && out.snapshots != "csv" && out.snapshots != "binary")
    throw Error("config.invalid_value", "output.snapshots must be none, csv or binary");
  r.finish();

  if (out.masked) {
    MaskedConfig& m = out.masked_config;
    m.domain = circ;
    m.resolution = c.resolution;
    m.params = c.params;
    m.friction = friction;
    m.rho_hat = c.initial.rho_hat;
    m.velocity_amplitude = preset == "swirl" ? c.initial.velocity_amplitude : 0.0;
    m.density_amplitude = preset == "swirl" ? c.initial.density_amplitude : 0.0;
    m.seed = c.initial.seed;
    m.final_time = c.final_time;
    m.cadence = c.cadence;
    m.safety = c.safety;
    m.floor_factor = c.floor_factor;
    m.allow_parameter_override = c.allow_parameter_override;
  }
  return out;
}

Json to_json(const SimulateConfig& s) {
  const SimulationConfig& c = s.polar;
  Json j;
  if (s.masked) {
    j["domain"] = domain_to_json(s.masked_config.domain);
  } else {
    j["domain"] = domain_to_json(CircularDomain::annulus(c.inner_radius));
  }
  j["resolution"] = c.resolution;
  j["params"] = {{"mu", c.params.mu}, {"beta", c.params.beta}, {"gamma", c.params.gamma}};
  j["allow_parameter_override"] = c.allow_parameter_override;
  if (s.masked)
    j["friction"] = s.masked_config.friction;
  else
    j["friction"] = Json::array({c.k_outer, c.k_inner});
  j["seed"] = s.seed;
  std::string preset = preset_name(c.initial.preset);
  if (s.masked) preset = s.masked_config.velocity_amplitude != 0.0 || s.masked_config.density_amplitude != 0.0 ? "swirl" : "rest";
  j["initial"] = {{"preset", preset},
                  {"rho_hat", c.initial.rho_hat},
                  {"c1", c.initial.c1},
                  {"c2", c.initial.c2},
                  {"density_amplitude", c.initial.density_amplitude},
                  {"velocity_amplitude", c.initial.velocity_amplitude},
                  {"modes", c.initial.modes}};
  j["final_time"] = c.final_time;
  j["cadence"] = c.cadence;
  j["safety"] = c.safety;
  j["scheme"] = {{"muscl", c.muscl},
                 {"implicit_viscosity", c.implicit_viscosity},
                 {"floor_factor", c.floor_factor},
                 {"band_constant", c.band_constant}};
  j["output"] = {{"snapshots", s.snapshots}};
  return j;
}

std::uint64_t config_hash(const Json& resolved) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const unsigned char ch : resolved.dump()) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(const fs::path& path, std::vector<Column> columns)
    : path_(path), width_(columns.size()), out_(path, std::ios::binary) {
  if (!out_) throw Error("config.output_error", "cannot write " + path.string());
  for (const Column& c : columns) out_ << "# " << c.name << " [" << c.unit << "]: " << c.definition << '\n';
  for (std::size_t k = 0; k < columns.size(); ++k) out_ << (k ? "," : "") << columns[k].name;
  out_ << '\n';
}

void CsvWriter::row(const std::vector<double>& values) {
  if (values.size() != width_) throw Error("config.output_error", "row width does not match the header");
  for (std::size_t k = 0; k < values.size(); ++k) out_ << (k ? "," : "") << format_double(values[k]);
  out_ << '\n';
}

void write_grid_binary(const fs::path& path, const Eigen::ArrayXXd& values) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("config.output_error", "cannot write " + path.string());
  out.write(kMagic, sizeof kMagic);
  put_le(out, static_cast<std::uint32_t>(values.rows()), 4);
  put_le(out, static_cast<std::uint32_t>(values.cols()), 4);
  for (Eigen::Index i = 0; i < values.rows(); ++i)
    for (Eigen::Index j = 0; j < values.cols(); ++j) put_le(out, std::bit_cast<std::uint64_t>(values(i, j)), 8);
}

Eigen::ArrayXXd read_grid_binary(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("config.missing_file", path.string() + " does not exist");
  char magic[8];
  in.read(magic, 8);
  if (!in || !std::equal(magic, magic + 8, kMagic)) throw Error("config.invalid_dump", "bad magic");
  const auto rows = static_cast<Eigen::Index>(get_le(in, 4));
  const auto cols = static_cast<Eigen::Index>(get_le(in, 4));
  Eigen::ArrayXXd values(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) values(i, j) = std::bit_cast<double>(get_le(in, 8));
  return values;
}

std::string library_version() { return MCFLOW_VERSION; }

void write_sidecar(const fs::path& dir, const std::string& stem, const RunMetadata& meta) {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  Json j;
  j["command"] = meta.command;
  j["config_hash"] = hex64(config_hash(meta.resolved));
  j["versions"] = {{"mcflow", library_version()},
                   {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                 std::to_string(EIGEN_MINOR_VERSION)},
                   {"compiler", __VERSION__}};
  j["seed"] = meta.seed;
  j["threads"] = meta.threads;
  j["outputs"] = meta.outputs;
  j["exit_code"] = meta.exit_code;
  j["timestamp"] = stamp;
  std::ofstream(dir / (stem + ".meta.json")) << j.dump(2) << '\n';
  std::ofstream(dir / (stem + ".config.json")) << meta.resolved.dump(2) << '\n';
}

}  // namespace mcflow
