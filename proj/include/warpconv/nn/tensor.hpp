#ifndef WARPCONV_NN_TENSOR_HPP
#define WARPCONV_NN_TENSOR_HPP

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace warpconv::nn {

using Shape = std::vector<std::size_t>;

std::size_t element_count(const Shape& shape);
std::string shape_string(const Shape& shape);

/// Dense row-major tensor. Axis 0 is the batch axis wherever a batch exists.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape shape, double fill = 0.0);
    Tensor(Shape shape, std::vector<double> values);

    const Shape& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
    std::size_t size() const { return data_.size(); }
    std::size_t batch() const { return shape_.empty() ? 0 : shape_[0]; }
    std::size_t per_example() const { return batch() == 0 ? 0 : data_.size() / batch(); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::span<double> values() { return data_; }
    std::span<const double> values() const { return data_; }
    const std::vector<double>& storage() const { return data_; }

    double& operator[](std::size_t k) { return data_[k]; }
    double operator[](std::size_t k) const { return data_[k]; }

    std::span<double> example(std::size_t b) { return {data_.data() + b * per_example(), per_example()}; }
    std::span<const double> example(std::size_t b) const {
        return {data_.data() + b * per_example(), per_example()};
    }

private:
    Shape shape_;
    std::vector<double> data_;
};

}  // namespace warpconv::nn

#endif
