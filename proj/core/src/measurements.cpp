#include "chosim/measurements.hpp"

#include "chosim/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace chosim {

void validate(const MeasurementConfig& c)
{
    if (c.l1_samples < 1 || c.period_steps < 1 || c.strongest_beams < 1)
    {
        throw ConfigError("N_L1, measurement period and N_str must be >= 1");
    }
    if (c.cell_filter_k < 0.0 || c.beam_filter_k < 0.0)
    {
        throw ConfigError("L3 filter coefficients must be >= 0");
    }
}

double l1_beam_filter(std::span<const double> samples_dbm, AveragingDomain domain)
{
    if (samples_dbm.empty())
    {
        throw std::invalid_argument("l1_beam_filter: empty sample buffer");
    }
    const auto n = static_cast<double>(samples_dbm.size());
    if (domain == AveragingDomain::Db)
    {
        return std::accumulate(samples_dbm.begin(), samples_dbm.end(), 0.0) / n;
    }
    double mw = 0.0;
    for (double s : samples_dbm)
    {
        mw += std::pow(10.0, s / 10.0);
    }
    return 10.0 * std::log10(mw / n);
}

std::vector<int> strongest_beam_set(std::span<const double> l1_dbm, double threshold_dbm)
{
    std::vector<int> out;
    for (std::size_t b = 0; b < l1_dbm.size(); ++b)
    {
        if (l1_dbm[b] > threshold_dbm)
        {
            out.push_back(static_cast<int>(b));
        }
    }
    return out;
}

double l1_cell_quality(std::span<const double> l1_dbm, double threshold_dbm, int strongest)
{
    std::vector<int> set = strongest_beam_set(l1_dbm, threshold_dbm);
    if (set.empty())
    {
        return *std::max_element(l1_dbm.begin(), l1_dbm.end());
    }
    const auto keep = std::min<std::size_t>(set.size(), static_cast<std::size_t>(strongest));
    std::partial_sort(set.begin(), set.begin() + static_cast<std::ptrdiff_t>(keep), set.end(),
                      [&](int a, int b) {
                          return l1_dbm[a] > l1_dbm[b] || (l1_dbm[a] == l1_dbm[b] && a < b);
                      });
    double sum = 0.0;
    for (std::size_t i = 0; i < keep; ++i)
    {
        sum += l1_dbm[set[i]];
    }
    return sum / static_cast<double>(keep);
}

double forgetting_factor(double k)
{
    return std::pow(0.5, k / 4.0);
}

double l3_update(std::optional<double> previous_dbm, double input_dbm, double alpha)
{
    if (!previous_dbm)
    {
        return input_dbm;
    }
    return alpha * input_dbm + (1.0 - alpha) * *previous_dbm;
}

MeasurementState::MeasurementState(int cells, int beams, const MeasurementConfig& config)
    : config_(config),
      cells_(cells),
      beams_(beams),
      alpha_cell_(forgetting_factor(config.cell_filter_k)),
      alpha_beam_(forgetting_factor(config.beam_filter_k)),
      ring_(static_cast<std::size_t>(cells) * beams * config.l1_samples, 0.0),
      l1_beam_(static_cast<std::size_t>(cells) * beams, 0.0),
      l1_cell_(static_cast<std::size_t>(cells), 0.0),
      l3_beam_(static_cast<std::size_t>(cells) * beams, 0.0),
      l3_cell_(static_cast<std::size_t>(cells), 0.0),
      window_(static_cast<std::size_t>(config.l1_samples))
{
    validate(config_);
}

bool MeasurementState::push(std::span<const double> raw_rsrp_dbm, std::int64_t step)
{
    const int n_l1 = config_.l1_samples;
    const std::size_t links = l1_beam_.size();
    for (std::size_t link = 0; link < links; ++link)
    {
        ring_[link * n_l1 + head_] = raw_rsrp_dbm[link];
    }
    head_ = (head_ + 1) % n_l1;
    filled_ = std::min(filled_ + 1, n_l1);

    if (step % config_.period_steps != 0)
    {
        return false;
    }

    const bool first = last_update_ < 0;
    for (std::size_t link = 0; link < links; ++link)
    {
        // Warm-up: average whatever has been collected so far.
        for (int i = 0; i < filled_; ++i)
        {
            const int slot = ((head_ - 1 - i) % n_l1 + n_l1) % n_l1;
            window_[i] = ring_[link * n_l1 + slot];
        }
        l1_beam_[link] = l1_beam_filter({window_.data(), static_cast<std::size_t>(filled_)},
                                        config_.l1_domain);
        l3_beam_[link] = l3_update(first ? std::nullopt : std::optional<double>(l3_beam_[link]),
                                   l1_beam_[link], alpha_beam_);
    }
    for (int c = 0; c < cells_; ++c)
    {
        l1_cell_[c] = l1_cell_quality(l1_beams(c), config_.beam_threshold_dbm,
                                      config_.strongest_beams);
        l3_cell_[c] = l3_update(first ? std::nullopt : std::optional<double>(l3_cell_[c]),
                                l1_cell_[c], alpha_cell_);
    }
    last_update_ = step;
    return true;
}

int MeasurementState::best_l1_beam(int cell) const noexcept
{
    const auto beams = l1_beams(cell);
    return static_cast<int>(std::max_element(beams.begin(), beams.end()) - beams.begin());
}

} // namespace chosim
