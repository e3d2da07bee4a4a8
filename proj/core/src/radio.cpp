#include "chosim/radio.hpp"

#include "chosim/errors.hpp"
#include "chosim/rng.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

namespace chosim {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDegToRad = kPi / 180.0;
constexpr double kSpeedOfLight = 299792458.0;
// Array-factor nulls are floored here so dB arithmetic never sees -inf.
constexpr double kArrayGainFloor = 1e-6;

double wrap_degrees(double a) noexcept
{
    a = std::fmod(a + 180.0, 360.0);
    if (a <= 0.0)
    {
        a += 360.0;
    }
    return a - 180.0;
}

/// |sum_{m<M} exp(j m psi)|^2 / M, which peaks at M for psi = 0 (mod 2 pi).
double linear_array_power(int m, double psi) noexcept
{
    const double s = std::sin(0.5 * psi);
    if (std::abs(s) < 1e-12)
    {
        return static_cast<double>(m);
    }
    const double num = std::sin(0.5 * m * psi);
    return num * num / (s * s * m);
}

struct SteeringTerms
{
    double cos_zenith;
    double sin_zenith_sin_azimuth;
};

SteeringTerms steering_terms(Direction d) noexcept
{
    const double zen = d.zenith_deg * kDegToRad;
    const double az = d.azimuth_deg * kDegToRad;
    return {std::cos(zen), std::sin(zen) * std::sin(az)};
}

double array_power(const BeamConfig& beam, SteeringTerms target, SteeringTerms dir) noexcept
{
    const double psi_v =
        2.0 * kPi * beam.vertical_spacing_wl * (dir.cos_zenith - target.cos_zenith);
    const double psi_h = 2.0 * kPi * beam.horizontal_spacing_wl *
                         (dir.sin_zenith_sin_azimuth - target.sin_zenith_sin_azimuth);
    const double g = linear_array_power(beam.rows, psi_v) * linear_array_power(beam.cols, psi_h);
    return std::max(g, kArrayGainFloor);
}

} // namespace

double db_to_mw(double dbm) noexcept
{
    return std::pow(10.0, dbm / 10.0);
}

double mw_to_db(double mw) noexcept
{
    return 10.0 * std::log10(mw);
}

std::vector<BeamConfig> default_beam_set()
{
    std::vector<BeamConfig> beams;
    beams.reserve(12);
    for (int b = 1; b <= 8; ++b)
    {
        beams.push_back({b, 90.0, -52.5 + 15.0 * (b - 1), 16, 8, 0.7, 0.5});
    }
    for (int b = 9; b <= 12; ++b)
    {
        beams.push_back({b, 97.0, -45.0 + 30.0 * (b - 8), 8, 4, 0.7, 0.5});
    }
    return beams;
}

double element_gain_dbi(double azimuth_deg, double elevation_deg) noexcept
{
    constexpr double hpbw = 65.0;
    constexpr double floor_db = 30.0;
    const double a_v = -std::min(12.0 * std::pow(elevation_deg / hpbw, 2.0), floor_db);
    const double a_h = -std::min(12.0 * std::pow(azimuth_deg / hpbw, 2.0), floor_db);
    return kElementPeakGainDbi - std::min(-(a_v + a_h), floor_db);
}

double array_gain_db(const BeamConfig& beam, Direction dir) noexcept
{
    const SteeringTerms target = steering_terms({beam.steer_azimuth_deg, beam.steer_zenith_deg});
    return 10.0 * std::log10(array_power(beam, target, steering_terms(dir)));
}

double beamforming_gain_dbi(const BeamConfig& beam, Direction dir) noexcept
{
    return element_gain_dbi(dir.azimuth_deg, dir.zenith_deg - 90.0) + array_gain_db(beam, dir);
}

void validate(const LinkModelConfig& c)
{
    if (!(c.carrier_ghz > 0.0))
    {
        throw ConfigError("carrier frequency must be positive");
    }
    if (c.scheduled_beams < 1)
    {
        throw ConfigError("scheduled beams per cell must be >= 1");
    }
    if (!(c.noise_dbm < c.tx_power_dbm))
    {
        throw ConfigError("noise power must be below TX power");
    }
    if (c.shadowing_std_db < 0.0 || c.fading_std_db < 0.0)
    {
        throw ConfigError("standard deviations must be non-negative");
    }
    if (c.shadowing_std_db > 0.0 && !(c.shadowing_decorrelation_m > 0.0))
    {
        throw ConfigError("shadowing decorrelation distance must be positive");
    }
    if (c.fading_coherence_ms < 0.0)
    {
        throw ConfigError("fading coherence time must be non-negative");
    }
    if (c.pathloss == PathlossModel::LogDistance && !(c.log_distance_exponent > 0.0))
    {
        throw ConfigError("log-distance exponent must be positive");
    }
}

double umi_street_canyon_pathloss_db(double d2d_m, double bs_height_m, double ue_height_m,
                                     double carrier_ghz, bool line_of_sight) noexcept
{
    const double d2d = std::max(d2d_m, 10.0);
    const double dh = bs_height_m - ue_height_m;
    const double d3d = std::sqrt(d2d * d2d + dh * dh);
    const double bp =
        4.0 * (bs_height_m - 1.0) * (ue_height_m - 1.0) * carrier_ghz * 1e9 / kSpeedOfLight;
    const double log_fc = std::log10(carrier_ghz);

    double los_db = 0.0;
    if (d2d <= bp)
    {
        los_db = 32.4 + 21.0 * std::log10(d3d) + 20.0 * log_fc;
    }
    else
    {
        los_db = 32.4 + 40.0 * std::log10(d3d) + 20.0 * log_fc -
                 9.5 * std::log10(bp * bp + dh * dh);
    }
    if (line_of_sight)
    {
        return los_db;
    }
    const double nlos_db =
        35.3 * std::log10(d3d) + 22.4 + 21.3 * log_fc - 0.3 * (ue_height_m - 1.5);
    return std::max(los_db, nlos_db);
}

double log_distance_pathloss_db(double d3d_m, double reference_db, double exponent) noexcept
{
    return reference_db + 10.0 * exponent * std::log10(std::max(d3d_m, 1.0));
}

// ---------------------------------------------------------------------------

ShadowingField::ShadowingField(std::uint64_t key, double std_db, double decorrelation_m,
                               Rect area, int sinusoids)
    : amplitude_(std_db * std::sqrt(2.0 / sinusoids)),
      area_(area)
{
    if (std_db <= 0.0)
    {
        amplitude_ = 0.0;
        return;
    }
    rng::Substream gen(key, rng::Stream::Shadowing);
    waves_.reserve(sinusoids);
    for (int i = 0; i < sinusoids; ++i)
    {
        // Radial wavenumber drawn from the 2D spectrum of exp(-r/d):
        // CDF 1 - (1 + d^2 k^2)^(-1/2).
        const double u = gen.uniform();
        const double k = std::sqrt(1.0 / ((1.0 - u) * (1.0 - u)) - 1.0) / decorrelation_m;
        const double theta = gen.uniform(0.0, 2.0 * kPi);
        waves_.push_back({k * std::cos(theta), k * std::sin(theta), gen.uniform(0.0, 2.0 * kPi)});
    }

    spacing_ = std::clamp(decorrelation_m / 5.0, 0.5, 2.0);
    nx_ = static_cast<int>(std::ceil(area.width() / spacing_)) + 2;
    ny_ = static_cast<int>(std::ceil(area.height() / spacing_)) + 2;
    grid_.resize(static_cast<std::size_t>(nx_) * ny_);
    for (int j = 0; j < ny_; ++j)
    {
        for (int i = 0; i < nx_; ++i)
        {
            const Point p{area.min.x + i * spacing_, area.min.y + j * spacing_};
            grid_[static_cast<std::size_t>(j) * nx_ + i] = static_cast<float>(exact(p));
        }
    }
}

double ShadowingField::exact(Point p) const noexcept
{
    double s = 0.0;
    for (const Wave& w : waves_)
    {
        s += std::cos(w.kx * p.x + w.ky * p.y + w.phase);
    }
    return amplitude_ * s;
}

double ShadowingField::at(Point p) const noexcept
{
    if (grid_.empty())
    {
        return 0.0;
    }
    const double fx = std::clamp((p.x - area_.min.x) / spacing_, 0.0, nx_ - 1.000001);
    const double fy = std::clamp((p.y - area_.min.y) / spacing_, 0.0, ny_ - 1.000001);
    const int i = static_cast<int>(fx);
    const int j = static_cast<int>(fy);
    const double tx = fx - i;
    const double ty = fy - j;
    const auto at = [&](int a, int b) {
        return static_cast<double>(grid_[static_cast<std::size_t>(b) * nx_ + a]);
    };
    return (1 - tx) * (1 - ty) * at(i, j) + tx * (1 - ty) * at(i + 1, j) +
           (1 - tx) * ty * at(i, j + 1) + tx * ty * at(i + 1, j + 1);
}

// ---------------------------------------------------------------------------

LinkModel::LinkModel(LinkModelConfig config, std::vector<Cell> cells,
                     std::vector<BeamConfig> beams, std::vector<Rect> buildings, Rect area,
                     double ue_height_m, std::uint64_t seed)
    : config_(config),
      cells_(std::move(cells)),
      beams_(std::move(beams)),
      ue_height_m_(ue_height_m)
{
    validate(config_);
    if (cells_.empty() || beams_.empty())
    {
        throw ConfigError("link model needs at least one cell and one beam");
    }
    int num_sites = 0;
    for (const Cell& c : cells_)
    {
        num_sites = std::max(num_sites, c.site + 1);
    }
    sites_.resize(num_sites);
    std::vector<bool> seen(num_sites, false);
    for (const Cell& c : cells_)
    {
        Site& s = sites_[c.site];
        if (seen[c.site])
        {
            continue;
        }
        seen[c.site] = true;
        s.position = c.position;
        s.height_m = c.height_m;
        for (const Rect& b : buildings)
        {
            if (!b.contains(c.position))
            {
                s.obstacles.push_back(b);
            }
        }
        const Rect padded{{area.min.x - 5.0, area.min.y - 5.0}, {area.max.x + 5.0, area.max.y + 5.0}};
        s.shadowing = ShadowingField(rng::hash_key({seed, static_cast<std::uint64_t>(c.site)}),
                                     config_.shadowing_std_db, config_.shadowing_decorrelation_m,
                                     padded);
    }
}

bool LinkModel::line_of_sight(Point ue, int site) const noexcept
{
    const Site& s = sites_[site];
    return std::none_of(s.obstacles.begin(), s.obstacles.end(),
                        [&](const Rect& r) { return segment_intersects(ue, s.position, r); });
}

Direction LinkModel::direction(Point ue, const Cell& cell) const noexcept
{
    const Point d = ue - cell.position;
    const double d2d = std::max(norm(d), 1e-3);
    const double global_az = std::atan2(d.y, d.x) / kDegToRad;
    const double zenith = 90.0 + std::atan2(cell.height_m - ue_height_m_, d2d) / kDegToRad;
    return {wrap_degrees(global_az - cell.boresight_deg), zenith};
}

double LinkModel::pathloss_db(Point ue, const Site& site, bool los) const noexcept
{
    const double d2d = distance(ue, site.position);
    if (config_.pathloss == PathlossModel::LogDistance)
    {
        const double dh = site.height_m - ue_height_m_;
        return log_distance_pathloss_db(std::sqrt(d2d * d2d + dh * dh),
                                        config_.log_distance_reference_db,
                                        config_.log_distance_exponent);
    }
    return umi_street_canyon_pathloss_db(d2d, site.height_m, ue_height_m_, config_.carrier_ghz,
                                         los);
}

LinkSample LinkModel::sample(Point ue, int cell, int beam, double fading_db) const noexcept
{
    const Cell& c = cells_[cell];
    const Site& s = sites_[c.site];
    LinkSample out;
    out.line_of_sight = line_of_sight(ue, c.site);
    out.pathloss_db = pathloss_db(ue, s, out.line_of_sight);
    out.gain_dbi = beamforming_gain_dbi(beams_[beam], direction(ue, c));
    out.shadowing_db = s.shadowing.at(ue);
    out.fading_db = fading_db;
    out.rsrp_dbm =
        config_.tx_power_dbm - out.pathloss_db + out.gain_dbi + out.shadowing_db + out.fading_db;
    return out;
}

void LinkModel::evaluate(Point ue, std::span<const double> fading_db,
                         std::span<double> rsrp_dbm) const
{
    const int nb = num_beams();
    thread_local std::vector<double> site_base;
    thread_local std::vector<char> site_done;
    site_base.assign(sites_.size(), 0.0);
    site_done.assign(sites_.size(), 0);

    thread_local std::vector<SteeringTerms> targets;
    targets.resize(beams_.size());
    for (int b = 0; b < nb; ++b)
    {
        targets[b] = steering_terms({beams_[b].steer_azimuth_deg, beams_[b].steer_zenith_deg});
    }

    for (int c = 0; c < num_cells(); ++c)
    {
        const Cell& cell = cells_[c];
        if (!site_done[cell.site])
        {
            const Site& s = sites_[cell.site];
            const bool los = line_of_sight(ue, cell.site);
            site_base[cell.site] =
                config_.tx_power_dbm - pathloss_db(ue, s, los) + s.shadowing.at(ue);
            site_done[cell.site] = 1;
        }
        const Direction dir = direction(ue, cell);
        const double element = element_gain_dbi(dir.azimuth_deg, dir.zenith_deg - 90.0);
        const SteeringTerms terms = steering_terms(dir);
        const double base = site_base[cell.site] + element;
        for (int b = 0; b < nb; ++b)
        {
            const int link = c * nb + b;
            rsrp_dbm[link] = base + 10.0 * std::log10(array_power(beams_[b], targets[b], terms)) +
                             fading_db[link];
        }
    }
}

// ---------------------------------------------------------------------------

FadingProcess::FadingProcess(const LinkModelConfig& config, int links, double step_ms,
                             std::uint64_t seed, int ue)
    : state_(static_cast<std::size_t>(links), 0.0),
      rho_(config.fading_coherence_ms > 0.0 ? std::exp(-step_ms / config.fading_coherence_ms)
                                            : 0.0),
      innovation_(config.fading_std_db * std::sqrt(1.0 - rho_ * rho_)),
      std_(config.fading_std_db),
      key_(rng::hash_key({seed, static_cast<std::uint64_t>(rng::Stream::Fading),
                          static_cast<std::uint64_t>(ue)})),
      enabled_(config.fading == FadingModel::GaussMarkov && config.fading_std_db > 0.0)
{
}

void FadingProcess::advance(std::int64_t step) noexcept
{
    if (!enabled_)
    {
        return;
    }
    const bool first = step == 0;
    const double keep = first ? 0.0 : rho_;
    const double scale = first ? std_ : innovation_;
    const std::size_t n = state_.size();
    for (std::size_t i = 0; i < n; i += 2)
    {
        const auto [z0, z1] =
            rng::gaussian_pair(rng::hash_key({key_, i, static_cast<std::uint64_t>(step)}));
        state_[i] = keep * state_[i] + scale * z0;
        if (i + 1 < n)
        {
            state_[i + 1] = keep * state_[i + 1] + scale * z1;
        }
    }
}

// ---------------------------------------------------------------------------

void InterferenceSnapshot::assign(std::span<const double> rsrp_dbm, int beams_per_cell,
                                  int scheduled_beams, double noise_dbm)
{
    rsrp_dbm_ = rsrp_dbm;
    beams_ = beams_per_cell;
    noise_mw_ = db_to_mw(noise_dbm);
    const int cells = static_cast<int>(rsrp_dbm.size()) / beams_per_cell;
    const int k = std::min(scheduled_beams, beams_per_cell);
    per_cell_mw_.assign(cells, 0.0);
    scratch_.resize(beams_per_cell);
    for (int c = 0; c < cells; ++c)
    {
        std::copy_n(rsrp_dbm.begin() + static_cast<std::ptrdiff_t>(c) * beams_per_cell,
                    beams_per_cell, scratch_.begin());
        std::partial_sort(scratch_.begin(), scratch_.begin() + k, scratch_.end(),
                          std::greater<>());
        double sum = 0.0;
        for (int i = 0; i < k; ++i)
        {
            sum += db_to_mw(scratch_[i]);
        }
        per_cell_mw_[c] = sum / k;
    }
}

double InterferenceSnapshot::sinr_db(int cell, int beam) const noexcept
{
    double interference = 0.0;
    const int cells = static_cast<int>(per_cell_mw_.size());
    for (int c = 0; c < cells; ++c)
    {
        if (c != cell)
        {
            interference += per_cell_mw_[c];
        }
    }
    const double signal = db_to_mw(rsrp_dbm_[static_cast<std::size_t>(cell) * beams_ + beam]);
    return mw_to_db(signal / (noise_mw_ + interference));
}

double compute_sinr_db(std::span<const double> rsrp_dbm, int beams_per_cell, int cell, int beam,
                       double noise_dbm, int scheduled_beams)
{
    InterferenceSnapshot snap;
    snap.assign(rsrp_dbm, beams_per_cell, scheduled_beams, noise_dbm);
    return snap.sinr_db(cell, beam);
}

} // namespace chosim
