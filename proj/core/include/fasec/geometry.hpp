#pragma once

#include <string>
#include <vector>

#include "fasec/linalg.hpp"

namespace fasec {

inline constexpr double kSpeedOfLight = 299'792'458.0;  // m/s
inline constexpr double kPi = 3.14159265358979323846;

double dbm_to_watts(double dbm);
double watts_to_dbm(double watts);

enum class Target { bob, eve };
enum class ChannelModel { exact, fresnel };

const char* to_string(Target t);
const char* to_string(ChannelModel m);
ChannelModel parse_channel_model(const std::string& text);

/// A receive ULA parallel to the transmit rail, centered at
/// (d·cosθ, d·sinθ).
struct ReceiverGeometry {
  double distance_m = 15.0;
  double azimuth_rad = kPi / 4.0;
  int num_elements = 8;
  double element_spacing_m = 0.0;  // 0 → λ/2 when the scenario is finalized

  double x() const;
  double y() const;
};

/// Full physical configuration of one transmitter, one legitimate receiver
/// and one eavesdropper. All quantities are SI.
struct ScenarioGeometry {
  double carrier_freq_hz = 2.8e9;
  int num_ports = 64;      // L
  int num_active = 16;     // N_t
  double port_spacing_m = 0.0;  // 0 → rail spans an N_t-element λ/2 aperture
  ReceiverGeometry bob{15.0, kPi / 4.0, 8, 0.0};
  ReceiverGeometry eve{5.0, kPi / 4.0, 8, 0.0};
  double noise_power_w = 3.1622776601683794e-14;  // σ² (−105 dBm)
  int streams = 4;             // K
  int rf_chains = 8;           // N_RF

  double wavelength() const { return kSpeedOfLight / carrier_freq_hz; }

  const ReceiverGeometry& receiver(Target t) const {
    return t == Target::bob ? bob : eve;
  }

  /// Aperture of an N_t-element half-wavelength array, (N_t − 1)λ/2.
  double transmit_aperture() const;

  /// Fills derived defaults (port spacing, λ/2 element spacing) and checks
  /// every invariant. Throws ConfigError.
  void finalize();
  void validate() const;
};

/// Offsets (k − (n−1)/2)·spacing for k = 0..n−1: zero-mean, symmetric.
VectorXd centered_offsets(int count, double spacing);

VectorXd port_offsets(const ScenarioGeometry& g);
VectorXd element_offsets(const ReceiverGeometry& r);

/// Default rail pitch D_A/(L−1) with D_A the N_t-element λ/2 aperture.
double default_port_spacing(double carrier_freq_hz, int num_ports, int num_active);

/// Distance from port `port` (0-based) to receive element `element`.
double exact_distance(const ScenarioGeometry& g, int port, int element, Target t);
/// Distance from receive element `element` to the rail origin.
double exact_reference_distance(const ScenarioGeometry& g, int element, Target t);

/// Second-order Taylor (Fresnel) approximations of the two distances above.
double fresnel_distance(const ScenarioGeometry& g, int port, int element, Target t);
double fresnel_reference_distance(const ScenarioGeometry& g, int element, Target t);

/// Near-field LoS channel (N_rx × L), unwhitened. Entry (n, l) is
/// ρ_{n,l}·exp(−ι·2πf(d_{n,l} − d_n)/c)/√N_rx with ρ = c/(4πf·d_{n,l}).
MatrixXcd channel_matrix(const ScenarioGeometry& g, Target t, ChannelModel model);

/// Single-element probe at (x, y) in the rail plane, always with exact
/// distances. Returns a 1 × L row. Throws ConfigError when the point
/// coincides with the origin or with a port.
MatrixXcd probe_channel(const ScenarioGeometry& g, double x, double y);

/// H/√σ². Throws ConfigError when σ² ≤ 0.
MatrixXcd whiten(const MatrixXcd& h, double noise_power_w);

/// 2(D_tx + D_rx)²/λ.
double rayleigh_distance(double aperture_tx_m, double aperture_rx_m, double wavelength_m);

/// (n − 1)·spacing.
double array_aperture(int count, double spacing);

/// Whitened Bob/Eve channels on the full rail.
struct ChannelPair {
  MatrixXcd bob;  // N_u × L
  MatrixXcd eve;  // N_e × L
  bool whitened = true;
  ChannelModel model = ChannelModel::fresnel;

  /// Column restriction H·P_S.
  MatrixXcd bob_on(const std::vector<int>& support) const;
  MatrixXcd eve_on(const std::vector<int>& support) const;
};

ChannelPair synthesize_channels(const ScenarioGeometry& g, ChannelModel model);

/// Columns `support` of h.
MatrixXcd select_columns(const MatrixXcd& h, const std::vector<int>& support);

}  // namespace fasec
