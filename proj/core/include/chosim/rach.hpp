#pragma once

#include <cstdint>
#include <span>
#include <string_view>

namespace chosim {

struct PreparedTarget;

enum class RachProcedure
{
    ThreeGpp, ///< CFRA only when a prepared beam clears the access threshold
    Proposed, ///< CFRA whenever the selected beam is prepared
};

enum class PreambleKind
{
    Cfra,
    Cbra,
};

std::string_view to_string(RachProcedure procedure) noexcept;
std::string_view to_string(PreambleKind kind) noexcept;

struct RachConfig
{
    double access_threshold_dbm = -100.0; ///< xi_access; +-infinity allowed
    RachProcedure procedure = RachProcedure::ThreeGpp;
    double t304_ms = 500.0;
    double retry_period_ms = 10.0;
    double cbra_collision_probability = 0.0;
};

void validate(const RachConfig& config, double step_ms);

struct AccessBeam
{
    int beam = 0;
    bool prepared = false;        ///< beam is in B_prep
    bool above_threshold = false; ///< chosen among prepared beams above xi_access
};

/// Access-beam selection on the target's current L1 beam measurements.
/// If some prepared beam exceeds xi_access, the strongest prepared beam is
/// chosen; otherwise the strongest beam of the cell. Lowest index on ties.
AccessBeam select_access_beam(std::span<const double> target_l1_dbm, const PreparedTarget& target,
                              double access_threshold_dbm);

PreambleKind select_preamble(const AccessBeam& choice, RachProcedure procedure) noexcept;

/// A random-access attempt succeeds when the SINR of the accessed beam is
/// above gamma_out; CBRA attempts must also pass the collision gate, drawn
/// from `collision_key`.
bool rach_attempt_succeeds(double target_sinr_db, double gamma_out_db, PreambleKind kind,
                           double collision_probability, std::uint64_t collision_key) noexcept;

/// T304 supervision of one random-access procedure. Attempts fall on a
/// fixed cadence from the first preamble; expiry is a handover failure.
class T304Timer
{
  public:
    T304Timer() = default;
    T304Timer(std::int64_t timeout_steps, std::int64_t retry_steps) noexcept
        : timeout_(timeout_steps), retry_(retry_steps)
    {
    }

    void start(std::int64_t step) noexcept
    {
        start_ = step;
        running_ = true;
    }
    void stop() noexcept { running_ = false; }
    bool running() const noexcept { return running_; }
    std::int64_t start_step() const noexcept { return start_; }

    bool expired(std::int64_t step) const noexcept { return running_ && step - start_ >= timeout_; }
    bool attempt_due(std::int64_t step) const noexcept
    {
        return running_ && !expired(step) && (step - start_) % retry_ == 0;
    }
    /// Upper bound on attempts within one procedure.
    std::int64_t max_attempts() const noexcept { return (timeout_ + retry_ - 1) / retry_; }

  private:
    std::int64_t timeout_ = 1;
    std::int64_t retry_ = 1;
    std::int64_t start_ = 0;
    bool running_ = false;
};

} // namespace chosim
