#pragma once

#include <cstdint>
#include <span>
#include <string_view>

namespace chosim {

enum class FailureCause
{
    Rlf,
    Hof,
};

std::string_view to_string(FailureCause cause) noexcept;

struct RlfConfig
{
    double gamma_out_db = -8.0;
    double gamma_in_db = -6.0;
    double t310_ms = 600.0;
    double reestablishment_ms = 100.0;
};

void validate(const RlfConfig& config);

enum class RlfEvent
{
    None,
    Started,
    Recovered,
    Failure,
};

/// T310 supervision of the serving link with gamma_out / gamma_in hysteresis.
class RlfMonitor
{
  public:
    RlfMonitor() = default;
    RlfMonitor(double gamma_out_db, double gamma_in_db, std::int64_t t310_steps) noexcept
        : gamma_out_(gamma_out_db), gamma_in_(gamma_in_db), t310_(t310_steps)
    {
    }

    RlfEvent step(double serving_sinr_db, std::int64_t step) noexcept;
    void reset() noexcept { running_ = false; }

    bool running() const noexcept { return running_; }
    std::int64_t started_at() const noexcept { return started_; }

  private:
    double gamma_out_ = -8.0;
    double gamma_in_ = -6.0;
    std::int64_t t310_ = 60;
    std::int64_t started_ = 0;
    bool running_ = false;
};

/// Re-establishment target: the cell with the strongest L3 quality
/// (lowest index on ties).
int reestablishment_cell(std::span<const double> l3_cell_dbm) noexcept;

} // namespace chosim
