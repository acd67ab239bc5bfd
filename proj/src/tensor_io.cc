// Copyright 2026 The ClaimLens Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "claimlens/tensor_io.h"

#include <bit>
#include <cstring>
#include <fstream>

#include "claimlens/errors.h"
#include "claimlens/text.h"

namespace claimlens {

static_assert(std::endian::native == std::endian::little,
              "tensor files are little-endian");

namespace {

constexpr char kMagic[4] = {'C', 'L', 'T', 'N'};
constexpr uint32_t kVersion = 1;

template <typename T>
void Append(std::string &out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

class Reader {
 public:
  Reader(const std::string &data, const std::string &path)
      : data_(data), path_(path) {}

  template <typename T>
  T Take() {
    Need(sizeof(T));
    T value;
    std::memcpy(&value, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }

  std::string TakeString(size_t n) {
    Need(n);
    std::string s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool AtEnd() const { return pos_ == data_.size(); }

 private:
  void Need(size_t n) const {
    if (pos_ + n > data_.size()) {
      throw FormatError("truncated tensor file " + path_);
    }
  }

  const std::string &data_;
  const std::string &path_;
  size_t pos_ = 0;
};

}  // namespace

void TensorBundle::Put(const std::string &name, const Eigen::MatrixXd &value) {
  tensors_[name] = value;
}

void TensorBundle::PutVector(const std::string &name,
                             const Eigen::VectorXd &value) {
  tensors_[name] = value;
}

const Eigen::MatrixXd &TensorBundle::Get(const std::string &name) const {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) throw FormatError("missing tensor " + name);
  return it->second;
}

Eigen::MatrixXd TensorBundle::Get(const std::string &name, Eigen::Index rows,
                                  Eigen::Index cols) const {
  const Eigen::MatrixXd &m = Get(name);
  if (m.rows() != rows || m.cols() != cols) {
    throw FormatError("tensor " + name + " has shape " +
                      std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                      ", expected " + std::to_string(rows) + "x" +
                      std::to_string(cols));
  }
  return m;
}

Eigen::VectorXd TensorBundle::GetVector(const std::string &name,
                                        Eigen::Index size) const {
  const Eigen::MatrixXd &m = Get(name);
  if (m.size() != size || (m.cols() != 1 && m.rows() != 1)) {
    throw FormatError("tensor " + name + " is not a vector of size " +
                      std::to_string(size));
  }
  return Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
}

void TensorBundle::Write(const std::string &path, TensorDType dtype) const {
  std::string out(kMagic, 4);
  Append<uint32_t>(out, kVersion);
  Append<uint32_t>(out, static_cast<uint32_t>(tensors_.size()));
  for (const auto &[name, m] : tensors_) {
    Append<uint32_t>(out, static_cast<uint32_t>(name.size()));
    out.append(name);
    Append<uint8_t>(out, static_cast<uint8_t>(dtype));
    Append<uint64_t>(out, static_cast<uint64_t>(m.rows()));
    Append<uint64_t>(out, static_cast<uint64_t>(m.cols()));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        if (dtype == TensorDType::kFloat64) {
          Append<double>(out, m(r, c));
        } else {
          Append<float>(out, static_cast<float>(m(r, c)));
        }
      }
    }
  }
  WriteFile(path, out);
}

TensorBundle TensorBundle::Read(const std::string &path) {
  const std::string data = ReadFile(path);
  Reader in(data, path);
  if (in.TakeString(4) != std::string(kMagic, 4)) {
    throw FormatError("not a tensor file: " + path);
  }
  const uint32_t version = in.Take<uint32_t>();
  if (version != kVersion) {
    throw FormatError("unsupported tensor file version " +
                      std::to_string(version));
  }
  TensorBundle bundle;
  const uint32_t count = in.Take<uint32_t>();
  for (uint32_t i = 0; i < count; ++i) {
    const std::string name = in.TakeString(in.Take<uint32_t>());
    const uint8_t dtype = in.Take<uint8_t>();
    const uint64_t rows = in.Take<uint64_t>();
    const uint64_t cols = in.Take<uint64_t>();
    if (dtype > 1) throw FormatError("bad dtype for tensor " + name);
    Eigen::MatrixXd m(rows, cols);
    for (uint64_t r = 0; r < rows; ++r) {
      for (uint64_t c = 0; c < cols; ++c) {
        m(r, c) = dtype == 0 ? in.Take<double>()
                             : static_cast<double>(in.Take<float>());
      }
    }
    bundle.tensors_[name] = std::move(m);
  }
  if (!in.AtEnd()) throw FormatError("trailing bytes in " + path);
  return bundle;
}

}  // namespace claimlens
