#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "invlab/common.hpp"

namespace invlab {

enum class Model { Darcy, Schrodinger };

std::string model_name(Model m);
Model model_from_name(const std::string& name);

/// Regression sample (Y_i, X_i), i = 1..N, with provenance: the generating
/// seed, noise level sigma, fixture name and the fine-grid resolution used
/// to evaluate the ground-truth regression function. u0_at_x holds the
/// noiseless responses at the design points.
struct Dataset {
    Model model = Model::Darcy;
    int d = 1;
    std::vector<std::array<double, 2>> X;
    Eigen::VectorXd Y;
    Eigen::VectorXd u0_at_x;
    double sigma = 0.0;
    std::uint64_t seed = 0;
    int fine_grid_ref = 0; // interior points of the data-generation grid
    std::string fixture;

    std::int64_t N() const { return static_cast<std::int64_t>(X.size()); }
    void validate() const;
};

} // namespace invlab
