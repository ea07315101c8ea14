#include "commgp/data.hpp"

#include "commgp/kernel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace commgp {

namespace {

constexpr const char *kColumns[7] = {"tx_easting", "tx_northing", "rx_easting",
                                     "rx_northing", "label",      "tx_agent",
                                     "rx_agent"};

std::vector<std::string> split_line(const std::string &line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ','))
    fields.push_back(field);
  if (!line.empty() && line.back() == ',')
    fields.emplace_back();
  return fields;
}

std::string trim(const std::string &s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos)
    return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string &raw, std::size_t row, const char *column) {
  const std::string s = trim(raw);
  double value = 0.0;
  const auto *first = s.data();
  const auto *last = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last)
    throw ParseError("row " + std::to_string(row) + ", column " + column +
                     ": unparsable number '" + s + "'");
  return value;
}

int parse_int(const std::string &raw, std::size_t row, const char *column) {
  const std::string s = trim(raw);
  int value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw ParseError("row " + std::to_string(row) + ", column " + column +
                     ": unparsable number '" + s + "'");
  return value;
}

} // namespace

std::vector<CommEvent> ingest_csv(std::istream &in) {
  std::string line;
  if (!std::getline(in, line))
    throw ParseError("missing header row");

  const auto header = split_line(line);
  std::array<int, 7> position;
  position.fill(-1);
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string name = trim(header[c]);
    for (int k = 0; k < 7; ++k)
      if (name == kColumns[k])
        position[static_cast<std::size_t>(k)] = static_cast<int>(c);
  }
  for (int k = 0; k < 7; ++k)
    if (position[static_cast<std::size_t>(k)] < 0)
      throw ParseError(std::string("missing column ") + kColumns[k]);

  std::vector<CommEvent> events;
  std::size_t row = 1; // header was row 0
  while (std::getline(in, line)) {
    if (trim(line).empty()) {
      ++row;
      continue;
    }
    const auto fields = split_line(line);
    auto field = [&](int k) -> const std::string & {
      const auto c = static_cast<std::size_t>(position[static_cast<std::size_t>(k)]);
      if (c >= fields.size())
        throw ParseError("row " + std::to_string(row) + ": missing field for column " +
                         kColumns[k]);
      return fields[c];
    };

    CommEvent event;
    event.tx_easting = parse_double(field(0), row, kColumns[0]);
    event.tx_northing = parse_double(field(1), row, kColumns[1]);
    event.rx_easting = parse_double(field(2), row, kColumns[2]);
    event.rx_northing = parse_double(field(3), row, kColumns[3]);
    event.label = parse_int(field(4), row, kColumns[4]);
    if (event.label != 0 && event.label != 1)
      throw ParseError("row " + std::to_string(row) +
                       ", column label: expected 0 or 1, got '" + trim(field(4)) + "'");
    event.tx_agent = parse_int(field(5), row, kColumns[5]);
    event.rx_agent = parse_int(field(6), row, kColumns[6]);
    events.push_back(event);
    ++row;
  }
  return events;
}

std::vector<CommEvent> ingest_csv_file(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw IoError("cannot open '" + path + "' for reading");
  try {
    return ingest_csv(in);
  } catch (const ParseError &e) {
    throw ParseError(path + ": " + e.what());
  }
}

void write_csv(std::ostream &out, const std::vector<CommEvent> &events) {
  out << "tx_easting,tx_northing,rx_easting,rx_northing,label,tx_agent,rx_agent\n";
  out.precision(17);
  for (const auto &e : events)
    out << e.tx_easting << ',' << e.tx_northing << ',' << e.rx_easting << ','
        << e.rx_northing << ',' << e.label << ',' << e.tx_agent << ',' << e.rx_agent
        << '\n';
}

void write_csv_file(const std::string &path, const std::vector<CommEvent> &events) {
  std::ofstream out(path);
  if (!out)
    throw IoError("cannot open '" + path + "' for writing");
  write_csv(out, events);
  if (!out)
    throw IoError("failed writing '" + path + "'");
}

Vector4d Standardizer::apply(const Vector4d &raw) const {
  return (raw - mean).cwiseQuotient(std);
}

Vector4d Standardizer::invert(const Vector4d &standardized) const {
  return standardized.cwiseProduct(std) + mean;
}

Standardizer fit_standardizer(const std::vector<CommEvent> &events) {
  if (events.size() < 2)
    throw InvalidArgument("fit_standardizer: need at least 2 events");
  const auto n = static_cast<double>(events.size());

  Standardizer st;
  st.mean.setZero();
  for (const auto &e : events)
    st.mean += e.features();
  st.mean /= n;

  Vector4d var = Vector4d::Zero();
  for (const auto &e : events) {
    const Vector4d d = e.features() - st.mean;
    var += d.cwiseProduct(d);
  }
  var /= n; // population variance
  for (int k = 0; k < 4; ++k) {
    if (!(var[k] > 0.0))
      throw InvalidArgument("fit_standardizer: zero variance in dimension " +
                            std::to_string(k));
    st.std[k] = std::sqrt(var[k]);
  }
  return st;
}

PointMatrix feature_matrix(const std::vector<CommEvent> &events) {
  PointMatrix X(static_cast<Eigen::Index>(events.size()), 4);
  for (std::size_t i = 0; i < events.size(); ++i)
    X.row(static_cast<Eigen::Index>(i)) = events[i].features();
  return X;
}

PointMatrix standardized_features(const std::vector<CommEvent> &events,
                                  const Standardizer &st) {
  PointMatrix X(static_cast<Eigen::Index>(events.size()), 4);
  for (std::size_t i = 0; i < events.size(); ++i)
    X.row(static_cast<Eigen::Index>(i)) = st.apply(events[i].features());
  return X;
}

Split permutation_split(std::size_t n_events, const SplitPlan &plan,
                        int permutation_index) {
  if (permutation_index < 0 || permutation_index >= plan.permutations)
    throw InvalidArgument("permutation_split: index out of range");
  if (!(plan.train_fraction > 0.0 && plan.train_fraction < 1.0))
    throw InvalidArgument("permutation_split: train fraction must lie in (0,1)");

  std::vector<Eigen::Index> order(n_events);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  Rng rng = make_rng(plan.seed,
                     {kStreamSplit, static_cast<std::uint64_t>(permutation_index)});
  shuffle(order, rng);

  const auto n_train = static_cast<std::size_t>(
      std::llround(plan.train_fraction * static_cast<double>(n_events)));
  Split split;
  split.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  split.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  return split;
}

namespace {

// Lawnmower position at path fraction tau in [0, 1): vertical legs joined by
// horizontal transits.
Vector4d lawnmower_xy(double tau, double width, double height, int legs) {
  const double spacing = legs > 1 ? width / (legs - 1) : 0.0;
  const double leg_len = height;
  const double total = legs * leg_len + (legs - 1) * spacing;
  double s = tau * total;
  for (int leg = 0; leg < legs; ++leg) {
    if (s <= leg_len || leg == legs - 1) {
      const double y = (leg % 2 == 0) ? std::min(s, leg_len) : leg_len - std::min(s, leg_len);
      return Vector4d(leg * spacing, y, 0, 0);
    }
    s -= leg_len;
    if (s <= spacing) {
      const double y = (leg % 2 == 0) ? leg_len : 0.0;
      return Vector4d(leg * spacing + s, y, 0, 0);
    }
    s -= spacing;
  }
  return Vector4d((legs - 1) * spacing, (legs % 2 == 1) ? leg_len : 0.0, 0, 0);
}

double logistic(double x) {
  if (x >= 0.0)
    return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Random Fourier feature field: a stationary Gaussian-process draw with
// squared-exponential covariance, evaluated cheaply per event.
struct FourierField {
  std::vector<Vector4d> omega;
  std::vector<double> phase;
  double amplitude = 0.0;
  double norm = 0.0;

  FourierField(double amplitude_, double lengthscale, Rng &rng, int n_features = 64)
      : amplitude(amplitude_) {
    omega.reserve(static_cast<std::size_t>(n_features));
    phase.reserve(static_cast<std::size_t>(n_features));
    for (int d = 0; d < n_features; ++d) {
      Vector4d o;
      for (int k = 0; k < 4; ++k)
        o[k] = normal(rng) / lengthscale;
      omega.push_back(o);
      phase.push_back(uniform_double(rng) * 2.0 * 3.141592653589793238462643383279502884);
    }
    norm = std::sqrt(2.0 / n_features);
  }

  double operator()(const Vector4d &x) const {
    if (amplitude == 0.0)
      return 0.0;
    double acc = 0.0;
    for (std::size_t d = 0; d < omega.size(); ++d)
      acc += std::cos(omega[d].dot(x) + phase[d]);
    return amplitude * norm * acc;
  }
};

} // namespace

std::vector<CommEvent> synthesize_dataset(const SynthSpec &spec) {
  if (spec.n_agents < 2)
    throw InvalidArgument("synthesize_dataset: need at least 2 agents");
  if (spec.rounds < 1 || spec.legs < 1 || spec.passes < 1)
    throw InvalidArgument("synthesize_dataset: rounds, legs, passes must be positive");
  if (spec.waypoints < 0)
    throw InvalidArgument("synthesize_dataset: waypoints must be nonnegative");
  if (!(spec.area_width > 0.0 && spec.area_height > 0.0))
    throw InvalidArgument("synthesize_dataset: degenerate survey area");
  if (!(spec.success_slope >= 0.0))
    throw InvalidArgument("synthesize_dataset: success slope must be nonnegative");
  if (!(spec.noise_lengthscale > 0.0))
    throw InvalidArgument("synthesize_dataset: noise lengthscale must be positive");

  Rng rng = make_rng(spec.seed, {kStreamSynth});
  const FourierField field(spec.noise, spec.noise_lengthscale, rng);

  std::vector<CommEvent> events;
  events.reserve(static_cast<std::size_t>(spec.rounds) * spec.n_agents *
                 (spec.n_agents - 1));
  for (int round = 0; round < spec.rounds; ++round) {
    // each agent repeats the lawnmower at its own rate, so the joint
    // (tx, rx) configuration fills a 2-D surface instead of a single curve.
    // With waypoints > 0 the mission cycles through that many fixed joint
    // configurations, so locality regions collect clustered revisits.
    std::vector<Vector4d> pos(static_cast<std::size_t>(spec.n_agents));
    for (int agent = 0; agent < spec.n_agents; ++agent) {
      const double rate = spec.passes + agent;
      const double along = spec.waypoints > 0
                               ? (round % spec.waypoints + 0.5) / spec.waypoints
                               : (round + 0.5) / spec.rounds;
      const double phase = std::fmod(along * rate + 0.08 * agent, 1.0);
      Vector4d p = lawnmower_xy(phase, spec.area_width, spec.area_height, spec.legs);
      p[0] += 2.0 * normal(rng); // GPS-scale scatter keeps positions distinct
      p[1] += 2.0 * normal(rng);
      pos[static_cast<std::size_t>(agent)] = p;
    }
    for (int tx = 0; tx < spec.n_agents; ++tx) {
      for (int rx = 0; rx < spec.n_agents; ++rx) {
        if (tx == rx)
          continue;
        const auto &pt = pos[static_cast<std::size_t>(tx)];
        const auto &pr = pos[static_cast<std::size_t>(rx)];
        CommEvent event;
        event.tx_easting = pt[0];
        event.tx_northing = pt[1];
        event.rx_easting = pr[0];
        event.rx_northing = pr[1];
        event.tx_agent = tx;
        event.rx_agent = rx;
        const double range = std::hypot(pt[0] - pr[0], pt[1] - pr[1]);
        const double p = logistic(spec.success_intercept - spec.success_slope * range +
                                  field(event.features()));
        event.label = uniform_double(rng) < p ? 1 : 0;
        events.push_back(event);
      }
    }
  }
  return events;
}

double accuracy(const std::vector<double> &probs, const std::vector<int> &labels) {
  if (probs.empty() || probs.size() != labels.size())
    throw InvalidArgument("accuracy: inputs must be non-empty and equal length");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const bool predicted_success = probs[i] > 0.5;
    if (predicted_success == (labels[i] == 1))
      ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(probs.size());
}

double negative_log_likelihood(const std::vector<double> &probs,
                               const std::vector<int> &labels) {
  if (probs.empty() || probs.size() != labels.size())
    throw InvalidArgument("negative_log_likelihood: inputs must be non-empty and equal length");
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double p = std::min(std::max(probs[i], 1e-12), 1.0 - 1e-12);
    acc += labels[i] == 1 ? std::log(p) : std::log(1.0 - p);
  }
  return -acc / static_cast<double>(probs.size());
}

} // namespace commgp
