#pragma once

#include "chosim/geometry.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace chosim {

/// Direction of departure in a sector-local frame: azimuth 0 is the sector
/// boresight, zenith 90 is the horizon, zenith > 90 points below it.
struct Direction
{
    double azimuth_deg = 0.0;
    double zenith_deg = 90.0;
};

/// One SSB beam of a cell, realised by a uniform planar array.
///
/// The steering pair follows the beam table of the deployment: beams 1-8 sit
/// on the horizon (zenith 90) and fan out in azimuth -52.5 + 15 (b - 1);
/// beams 9-12 are tilted 7 degrees down (zenith 97) at azimuth -45 + 30 (b - 8).
struct BeamConfig
{
    int number = 1; ///< 1-based beam number b
    double steer_zenith_deg = 90.0;
    double steer_azimuth_deg = 0.0;
    int rows = 1; ///< vertical element count
    int cols = 1; ///< horizontal element count
    double vertical_spacing_wl = 0.7;
    double horizontal_spacing_wl = 0.5;

    int elements() const noexcept { return rows * cols; }
};

/// The twelve-beam codebook used by every cell.
std::vector<BeamConfig> default_beam_set();

inline constexpr double kElementPeakGainDbi = 8.0;

/// Single-element pattern of TR 38.901 Table 7.3-1 (65 degree HPBW in both
/// cuts, 30 dB floors, 8 dBi peak). Offsets are relative to the panel
/// boresight; elevation offset is zenith - 90.
double element_gain_dbi(double azimuth_deg, double elevation_deg) noexcept;

/// Array-factor power gain of the beam in dB; 10 log10(rows * cols) at the
/// steering direction and never above it.
double array_gain_db(const BeamConfig& beam, Direction dir) noexcept;

/// Element pattern plus array factor.
double beamforming_gain_dbi(const BeamConfig& beam, Direction dir) noexcept;

enum class PathlossModel
{
    UmiStreetCanyon,
    LogDistance,
};

enum class FadingModel
{
    None,
    GaussMarkov, ///< first-order autoregressive Gaussian process in dB
};

struct LinkModelConfig
{
    double carrier_ghz = 28.0;
    double tx_power_dbm = 12.0; ///< per PRB
    double noise_dbm = -97.0;   ///< per PRB
    PathlossModel pathloss = PathlossModel::UmiStreetCanyon;
    double log_distance_reference_db = 61.34; ///< loss at 1 m
    double log_distance_exponent = 3.0;
    double shadowing_std_db = 4.0;
    double shadowing_decorrelation_m = 10.0;
    FadingModel fading = FadingModel::GaussMarkov;
    double fading_std_db = 5.0;
    double fading_coherence_ms = 200.0;
    int scheduled_beams = 4; ///< K simultaneously scheduled beams per interfering cell
};

void validate(const LinkModelConfig& config);

/// 3GPP TR 38.901 UMi Street Canyon pathloss. Distances in metres, the 2D
/// distance is clamped to the model's 10 m lower validity bound.
double umi_street_canyon_pathloss_db(double d2d_m, double bs_height_m, double ue_height_m,
                                     double carrier_ghz, bool line_of_sight) noexcept;

double log_distance_pathloss_db(double d3d_m, double reference_db, double exponent) noexcept;

struct LinkSample
{
    double rsrp_dbm = 0.0;
    double pathloss_db = 0.0;
    double gain_dbi = 0.0;
    double shadowing_db = 0.0;
    double fading_db = 0.0;
    bool line_of_sight = true;
};

struct Cell
{
    int id = 0;
    int site = 0;
    Point position;
    double height_m = 10.0;
    double boresight_deg = 0.0; ///< global azimuth of the sector, counter-clockwise from +x
};

/// Spatially correlated zero-mean Gaussian field with exponential
/// autocorrelation exp(-r / decorrelation), synthesised as a sum of
/// sinusoids and cached on a regular grid with bilinear lookup.
class ShadowingField
{
  public:
    ShadowingField() = default;
    ShadowingField(std::uint64_t key, double std_db, double decorrelation_m, Rect area,
                   int sinusoids = 128);

    double at(Point p) const noexcept;
    double exact(Point p) const noexcept;

  private:
    struct Wave
    {
        double kx;
        double ky;
        double phase;
    };

    std::vector<Wave> waves_;
    double amplitude_ = 0.0;
    Rect area_;
    double spacing_ = 1.0;
    int nx_ = 0;
    int ny_ = 0;
    std::vector<float> grid_;
};

/// Deterministic part of every (UE position, cell, beam) link: pathloss,
/// beamforming gain and shadowing. Fast fading is supplied by the caller so
/// the model itself stays a pure function of position.
class LinkModel
{
  public:
    LinkModel(LinkModelConfig config, std::vector<Cell> cells, std::vector<BeamConfig> beams,
              std::vector<Rect> buildings, Rect area, double ue_height_m, std::uint64_t seed);

    const LinkModelConfig& config() const noexcept { return config_; }
    std::span<const Cell> cells() const noexcept { return cells_; }
    std::span<const BeamConfig> beams() const noexcept { return beams_; }
    int num_cells() const noexcept { return static_cast<int>(cells_.size()); }
    int num_beams() const noexcept { return static_cast<int>(beams_.size()); }
    int num_links() const noexcept { return num_cells() * num_beams(); }

    bool line_of_sight(Point ue, int site) const noexcept;
    Direction direction(Point ue, const Cell& cell) const noexcept;

    /// Full decomposition of one link.
    LinkSample sample(Point ue, int cell, int beam, double fading_db) const noexcept;

    /// RSRP of every link, laid out [cell * num_beams + beam]. Matches
    /// sample() up to floating-point rounding.
    void evaluate(Point ue, std::span<const double> fading_db, std::span<double> rsrp_dbm) const;

  private:
    struct Site
    {
        Point position;
        double height_m;
        std::vector<Rect> obstacles; ///< buildings other than the host rooftop
        ShadowingField shadowing;
    };

    double pathloss_db(Point ue, const Site& site, bool los) const noexcept;

    LinkModelConfig config_;
    std::vector<Cell> cells_;
    std::vector<BeamConfig> beams_;
    std::vector<Site> sites_;
    double ue_height_m_;
};

/// Per-UE fast fading of all links, advanced once per time step. The
/// innovation of link i at step n is keyed by (seed, ue, i, n) so a given
/// UE sees the same fading in every run that shares the seed.
class FadingProcess
{
  public:
    FadingProcess(const LinkModelConfig& config, int links, double step_ms, std::uint64_t seed,
                  int ue);

    void advance(std::int64_t step) noexcept;
    std::span<const double> values() const noexcept { return state_; }

  private:
    std::vector<double> state_;
    double rho_;
    double innovation_;
    double std_;
    std::uint64_t key_;
    bool enabled_;
};

/// Interference bookkeeping for one UE at one step. Every cell other than
/// the signal's own cell contributes the mean linear power of its K
/// strongest beams toward the UE.
class InterferenceSnapshot
{
  public:
    InterferenceSnapshot() = default;
    void assign(std::span<const double> rsrp_dbm, int beams_per_cell, int scheduled_beams,
                double noise_dbm);

    double sinr_db(int cell, int beam) const noexcept;
    double cell_interference_mw(int cell) const noexcept { return per_cell_mw_[cell]; }

  private:
    std::span<const double> rsrp_dbm_;
    std::vector<double> per_cell_mw_;
    std::vector<double> scratch_;
    double total_mw_ = 0.0;
    double noise_mw_ = 0.0;
    int beams_ = 0;
};

/// One-shot SINR of (cell, beam) given all link RSRPs.
double compute_sinr_db(std::span<const double> rsrp_dbm, int beams_per_cell, int cell, int beam,
                       double noise_dbm, int scheduled_beams);

double db_to_mw(double dbm) noexcept;
double mw_to_db(double mw) noexcept;

} // namespace chosim
