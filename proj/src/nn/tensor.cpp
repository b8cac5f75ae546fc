#include "warpconv/nn/tensor.hpp"

#include <functional>
#include <numeric>
#include <stdexcept>

namespace warpconv::nn {

std::size_t element_count(const Shape& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(const Shape& shape) {
    std::string s = "[";
    for (std::size_t k = 0; k < shape.size(); ++k) {
        if (k) s += ", ";
        s += std::to_string(shape[k]);
    }
    return s + "]";
}

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)), data_(element_count(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> values) : shape_(std::move(shape)), data_(std::move(values)) {
    if (data_.size() != element_count(shape_))
        throw std::invalid_argument("Tensor: " + std::to_string(data_.size()) + " values for shape " +
                                    shape_string(shape_));
}

}  // namespace warpconv::nn
