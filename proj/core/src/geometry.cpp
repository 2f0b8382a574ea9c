#include "fasec/geometry.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "fasec/error.hpp"

namespace fasec {

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double watts_to_dbm(double watts) {
  if (!(watts > 0.0)) return -std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(watts) + 30.0;
}

const char* to_string(Target t) { return t == Target::bob ? "bob" : "eve"; }

const char* to_string(ChannelModel m) { return m == ChannelModel::exact ? "exact" : "fresnel"; }

ChannelModel parse_channel_model(const std::string& text) {
  if (text == "exact") return ChannelModel::exact;
  if (text == "fresnel") return ChannelModel::fresnel;
  throw ConfigError("unknown channel model '" + text + "' (expected exact|fresnel)");
}

double ReceiverGeometry::x() const { return distance_m * std::cos(azimuth_rad); }
double ReceiverGeometry::y() const { return distance_m * std::sin(azimuth_rad); }

double ScenarioGeometry::transmit_aperture() const {
  return array_aperture(num_active, wavelength() / 2.0);
}

double default_port_spacing(double carrier_freq_hz, int num_ports, int num_active) {
  const double lambda = kSpeedOfLight / carrier_freq_hz;
  if (num_ports <= 1) return lambda / 2.0;
  return array_aperture(num_active, lambda / 2.0) / static_cast<double>(num_ports - 1);
}

void ScenarioGeometry::finalize() {
  if (!(carrier_freq_hz > 0.0) || !std::isfinite(carrier_freq_hz)) {
    throw ConfigError("carrier frequency must be positive");
  }
  if (num_ports < 1 || num_active < 1) throw ConfigError("port counts must be positive");
  if (port_spacing_m == 0.0) {
    port_spacing_m = default_port_spacing(carrier_freq_hz, num_ports, num_active);
    // A single active element spans no aperture; fall back to λ/2.
    if (port_spacing_m == 0.0) port_spacing_m = wavelength() / 2.0;
  }
  if (bob.element_spacing_m == 0.0) bob.element_spacing_m = wavelength() / 2.0;
  if (eve.element_spacing_m == 0.0) eve.element_spacing_m = wavelength() / 2.0;
  validate();
}

void ScenarioGeometry::validate() const {
  auto require = [](bool ok, const char* msg) {
    if (!ok) throw ConfigError(msg);
  };
  require(carrier_freq_hz > 0.0 && std::isfinite(carrier_freq_hz),
          "carrier frequency must be positive");
  require(num_ports >= 1, "num_ports must be ≥ 1");
  require(num_active >= 1 && num_active <= num_ports, "num_active must lie in [1, num_ports]");
  require(streams >= 1, "streams must be ≥ 1");
  require(rf_chains >= streams, "rf_chains must be ≥ streams");
  require(rf_chains <= num_active, "rf_chains must be ≤ num_active");
  require(port_spacing_m > 0.0 && std::isfinite(port_spacing_m), "port spacing must be positive");
  require(noise_power_w > 0.0 && std::isfinite(noise_power_w), "noise power must be positive");
  for (const ReceiverGeometry* r : {&bob, &eve}) {
    require(r->distance_m > 0.0 && std::isfinite(r->distance_m),
            "receiver distance must be positive");
    require(r->azimuth_rad >= 0.0 && r->azimuth_rad <= kPi, "azimuth must lie in [0, π]");
    require(r->num_elements >= 1, "receiver element count must be ≥ 1");
    require(r->element_spacing_m > 0.0 && std::isfinite(r->element_spacing_m),
            "element spacing must be positive");
  }
}

VectorXd centered_offsets(int count, double spacing) {
  VectorXd out(count);
  const double center = 0.5 * static_cast<double>(count - 1);
  for (int k = 0; k < count; ++k) out(k) = (static_cast<double>(k) - center) * spacing;
  return out;
}

VectorXd port_offsets(const ScenarioGeometry& g) {
  return centered_offsets(g.num_ports, g.port_spacing_m);
}

VectorXd element_offsets(const ReceiverGeometry& r) {
  return centered_offsets(r.num_elements, r.element_spacing_m);
}

namespace {

double element_offset(const ReceiverGeometry& r, int element) {
  return (static_cast<double>(element) - 0.5 * static_cast<double>(r.num_elements - 1)) *
         r.element_spacing_m;
}

double port_offset(const ScenarioGeometry& g, int port) {
  return (static_cast<double>(port) - 0.5 * static_cast<double>(g.num_ports - 1)) *
         g.port_spacing_m;
}

double fresnel_form(double d, double sin_theta, double delta) {
  return d + sin_theta * delta + delta * delta / (2.0 * d);
}

}  // namespace

double exact_distance(const ScenarioGeometry& g, int port, int element, Target t) {
  const ReceiverGeometry& r = g.receiver(t);
  const double dy = r.y() + element_offset(r, element) - port_offset(g, port);
  return std::hypot(r.x(), dy);
}

double exact_reference_distance(const ScenarioGeometry& g, int element, Target t) {
  const ReceiverGeometry& r = g.receiver(t);
  return std::hypot(r.x(), r.y() + element_offset(r, element));
}

double fresnel_distance(const ScenarioGeometry& g, int port, int element, Target t) {
  const ReceiverGeometry& r = g.receiver(t);
  return fresnel_form(r.distance_m, std::sin(r.azimuth_rad),
                      element_offset(r, element) - port_offset(g, port));
}

double fresnel_reference_distance(const ScenarioGeometry& g, int element, Target t) {
  const ReceiverGeometry& r = g.receiver(t);
  return fresnel_form(r.distance_m, std::sin(r.azimuth_rad), element_offset(r, element));
}

MatrixXcd channel_matrix(const ScenarioGeometry& g, Target t, ChannelModel model) {
  const ReceiverGeometry& r = g.receiver(t);
  const int rx = r.num_elements;
  const double f = g.carrier_freq_hz;
  const double scale = 1.0 / std::sqrt(static_cast<double>(rx));
  const double k = 2.0 * kPi * f / kSpeedOfLight;
  MatrixXcd h(rx, g.num_ports);
  for (int n = 0; n < rx; ++n) {
    const double d_ref = model == ChannelModel::exact ? exact_reference_distance(g, n, t)
                                                      : fresnel_reference_distance(g, n, t);
    for (int l = 0; l < g.num_ports; ++l) {
      const double d = model == ChannelModel::exact ? exact_distance(g, l, n, t)
                                                    : fresnel_distance(g, l, n, t);
      if (!std::isfinite(d) || !(d > 0.0) || !std::isfinite(d_ref)) {
        throw NumericalError("channel synthesis: non-finite or zero distance");
      }
      const double rho = kSpeedOfLight / (4.0 * kPi * f * d);
      h(n, l) = std::polar(scale * rho, -k * (d - d_ref));
    }
  }
  return h;
}

MatrixXcd probe_channel(const ScenarioGeometry& g, double x, double y) {
  const double d_ref = std::hypot(x, y);
  if (!(d_ref > 0.0)) throw ConfigError("probe point coincides with the array origin");
  const double f = g.carrier_freq_hz;
  const double k = 2.0 * kPi * f / kSpeedOfLight;
  MatrixXcd h(1, g.num_ports);
  for (int l = 0; l < g.num_ports; ++l) {
    const double d = std::hypot(x, y - port_offset(g, l));
    if (!(d > 0.0)) throw ConfigError("probe point coincides with a port");
    h(0, l) = std::polar(kSpeedOfLight / (4.0 * kPi * f * d), -k * (d - d_ref));
  }
  return h;
}

MatrixXcd whiten(const MatrixXcd& h, double noise_power_w) {
  if (!(noise_power_w > 0.0)) throw ConfigError("noise power must be positive to whiten");
  return h / std::sqrt(noise_power_w);
}

double rayleigh_distance(double aperture_tx_m, double aperture_rx_m, double wavelength_m) {
  const double d = aperture_tx_m + aperture_rx_m;
  return 2.0 * d * d / wavelength_m;
}

double array_aperture(int count, double spacing) {
  return static_cast<double>(count - 1) * spacing;
}

MatrixXcd select_columns(const MatrixXcd& h, const std::vector<int>& support) {
  MatrixXcd out(h.rows(), static_cast<Eigen::Index>(support.size()));
  for (std::size_t j = 0; j < support.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = h.col(support[j]);
  return out;
}

MatrixXcd ChannelPair::bob_on(const std::vector<int>& support) const {
  return select_columns(bob, support);
}

MatrixXcd ChannelPair::eve_on(const std::vector<int>& support) const {
  return select_columns(eve, support);
}

ChannelPair synthesize_channels(const ScenarioGeometry& g, ChannelModel model) {
  g.validate();
  ChannelPair pair;
  pair.bob = whiten(channel_matrix(g, Target::bob, model), g.noise_power_w);
  pair.eve = whiten(channel_matrix(g, Target::eve, model), g.noise_power_w);
  pair.whitened = true;
  pair.model = model;
  return pair;
}

}  // namespace fasec
