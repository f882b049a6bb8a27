#ifndef SABCI_MATRIX_HPP
#define SABCI_MATRIX_HPP

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "sabci/error.hpp"

namespace sabci {

// Dense channels-by-samples matrix, row per channel, contiguous row-major.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t channels, std::size_t samples, double fill = 0.0)
        : channels_(channels), samples_(samples), data_(channels * samples, fill) {}

    std::size_t channels() const { return channels_; }
    std::size_t samples() const { return samples_; }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t c, std::size_t t) { return data_[c * samples_ + t]; }
    double operator()(std::size_t c, std::size_t t) const { return data_[c * samples_ + t]; }

    std::span<double> row(std::size_t c) { return {data_.data() + c * samples_, samples_}; }
    std::span<const double> row(std::size_t c) const {
        return {data_.data() + c * samples_, samples_};
    }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::size_t size() const { return data_.size(); }

    bool same_shape(const Matrix& other) const {
        return channels_ == other.channels_ && samples_ == other.samples_;
    }

    Matrix& operator+=(const Matrix& other) {
        require_shape(other);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
        return *this;
    }
    Matrix& operator-=(const Matrix& other) {
        require_shape(other);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
        return *this;
    }
    Matrix& operator*=(double s) {
        for (double& v : data_) v *= s;
        return *this;
    }

    friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
    friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
    friend Matrix operator*(Matrix a, double s) { return a *= s; }

    friend bool operator==(const Matrix& a, const Matrix& b) {
        return a.channels_ == b.channels_ && a.samples_ == b.samples_ && a.data_ == b.data_;
    }

private:
    void require_shape(const Matrix& other) const {
        if (!same_shape(other))
            fail(ErrorKind::invalid_argument, "matrix shape mismatch");
    }

    std::size_t channels_ = 0;
    std::size_t samples_ = 0;
    std::vector<double> data_;
};

// Multichannel EEG series in microvolts at a fixed sample rate.
struct MultichannelRecording {
    double sample_rate_hz = 0.0;
    std::vector<std::string> channel_names;
    Matrix samples; // channels x T, microvolts

    std::size_t channels() const { return samples.channels(); }
    std::size_t length() const { return samples.samples(); }

    void validate() const {
        if (sample_rate_hz <= 0.0)
            fail(ErrorKind::invalid_argument, "sample rate must be positive");
        if (samples.channels() < 1)
            fail(ErrorKind::invalid_argument, "recording needs at least one channel");
        if (!channel_names.empty() && channel_names.size() != samples.channels())
            fail(ErrorKind::invalid_argument, "channel name count does not match data");
    }
};

std::vector<std::string> default_channel_names(std::size_t n);

} // namespace sabci

#endif
