#pragma once

#include "chosim/ue_protocol.hpp"

#include <algorithm>
#include <vector>

namespace chosim::testing {

/// Hand-driven LinkObservation: every value is set directly by the test.
class ScriptedLink final : public LinkObservation
{
  public:
    ScriptedLink(int cells, int beams, double rsrp_dbm = -90.0, double sinr_db = 10.0)
        : cells_(cells), beams_(beams), l3_cells_(cells, rsrp_dbm),
          l1_(static_cast<std::size_t>(cells * beams), rsrp_dbm),
          l3_(static_cast<std::size_t>(cells * beams), rsrp_dbm),
          sinr_(static_cast<std::size_t>(cells * beams), sinr_db)
    {
    }

    std::span<const double> l3_cells() const override { return l3_cells_; }
    std::span<const double> l1_beams(int c) const override
    {
        return {l1_.data() + c * beams_, static_cast<std::size_t>(beams_)};
    }
    std::span<const double> l3_beams(int c) const override
    {
        return {l3_.data() + c * beams_, static_cast<std::size_t>(beams_)};
    }
    int serving_beam(int c) const override
    {
        const auto b = l1_beams(c);
        return static_cast<int>(std::max_element(b.begin(), b.end()) - b.begin());
    }
    double sinr_db(int c, int b) const override { return sinr_[c * beams_ + b]; }

    int cells() const noexcept { return cells_; }
    int beams() const noexcept { return beams_; }

    void set_cell(int c, double l3_dbm) { l3_cells_[c] = l3_dbm; }
    void set_l1(int c, int b, double v) { l1_[c * beams_ + b] = v; }
    void set_l3(int c, int b, double v) { l3_[c * beams_ + b] = v; }
    void set_sinr(int c, int b, double v) { sinr_[c * beams_ + b] = v; }
    void set_cell_sinr(int c, double v)
    {
        std::fill_n(sinr_.begin() + c * beams_, beams_, v);
    }
    void set_all_sinr(double v) { std::fill(sinr_.begin(), sinr_.end(), v); }

  private:
    int cells_;
    int beams_;
    std::vector<double> l3_cells_;
    std::vector<double> l1_;
    std::vector<double> l3_;
    std::vector<double> sinr_;
};

} // namespace chosim::testing
