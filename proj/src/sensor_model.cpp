#include "aoaq/sensor_model.hpp"

#include <algorithm>

namespace aoaq {

std::size_t PanelSample::defect_count() const noexcept {
    return static_cast<std::size_t>(std::count(defect_mask.begin(), defect_mask.end(), true));
}

}  // namespace aoaq
