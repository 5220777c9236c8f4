#pragma once

#include <Eigen/Dense>

#include <initializer_list>
#include <stdexcept>
#include <string>

namespace dynkit {

inline constexpr int kMaxDimension = 3;

// Fixed-capacity, dynamically sized vectors: no heap traffic on hot paths.
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDimension, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDimension, kMaxDimension>;

inline Vec make_vec(std::initializer_list<double> values)
{
    Vec v(static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (double x : values) v[i++] = x;
    return v;
}

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace dynkit
