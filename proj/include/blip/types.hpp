#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <vector>

#include "blip/error.hpp"

namespace blip {

using Complex = std::complex<double>;

// Spatial grid geometry: {N} for 1D signals, {rows, cols} for images.
// Images are stored row-major, voxel index = r * cols + c.
struct Dims {
  std::vector<std::size_t> extents;

  Dims() = default;
  Dims(std::initializer_list<std::size_t> e) : extents(e) {}
  explicit Dims(std::vector<std::size_t> e) : extents(std::move(e)) {}

  std::size_t rank() const { return extents.size(); }
  std::size_t size() const {
    if (extents.empty()) return 0;
    return std::accumulate(extents.begin(), extents.end(), std::size_t{1},
                           std::multiplies<>());
  }
  std::size_t operator[](std::size_t axis) const { return extents.at(axis); }
  bool valid() const {
    if (extents.empty() || extents.size() > 2) return false;
    for (auto e : extents)
      if (e == 0) return false;
    return true;
  }
  friend bool operator==(const Dims&, const Dims&) = default;
};

// Complex N x L image sequence X. Row i is the temporal response of voxel i,
// column t the image at read time t. Storage is voxel-major: data[i * L + t].
class MagnetizationSequence {
 public:
  MagnetizationSequence() = default;
  MagnetizationSequence(Dims dims, std::size_t frames)
      : dims_(std::move(dims)), frames_(frames), data_(dims_.size() * frames) {}

  const Dims& dims() const { return dims_; }
  std::size_t voxels() const { return dims_.size(); }
  std::size_t frames() const { return frames_; }

  std::span<Complex> row(std::size_t voxel) {
    return {data_.data() + voxel * frames_, frames_};
  }
  std::span<const Complex> row(std::size_t voxel) const {
    return {data_.data() + voxel * frames_, frames_};
  }
  Complex& at(std::size_t voxel, std::size_t t) { return data_[voxel * frames_ + t]; }
  const Complex& at(std::size_t voxel, std::size_t t) const {
    return data_[voxel * frames_ + t];
  }

  std::vector<Complex>& data() { return data_; }
  const std::vector<Complex>& data() const { return data_; }

  bool same_shape(const MagnetizationSequence& o) const {
    return dims_ == o.dims_ && frames_ == o.frames_;
  }

  friend bool operator==(const MagnetizationSequence&,
                         const MagnetizationSequence&) = default;

 private:
  Dims dims_;
  std::size_t frames_ = 0;
  std::vector<Complex> data_;
};

// Frobenius norm, accumulated in storage order.
double frobenius_norm(std::span<const Complex> v);

}  // namespace blip
