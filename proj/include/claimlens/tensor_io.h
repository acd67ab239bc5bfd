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

#ifndef CLAIMLENS_TENSOR_IO_H_
#define CLAIMLENS_TENSOR_IO_H_

#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace claimlens {

enum class TensorDType : uint8_t { kFloat64 = 0, kFloat32 = 1 };

// Binary tensor container used by every checkpoint:
//
//   "CLTN" u32:version u32:count
//   count x { u32:name_len name u8:dtype u64:rows u64:cols data[rows*cols] }
//
// All integers and floats little-endian, data row-major.
class TensorBundle {
 public:
  void Put(const std::string &name, const Eigen::MatrixXd &value);
  void PutVector(const std::string &name, const Eigen::VectorXd &value);

  bool Has(const std::string &name) const { return tensors_.count(name) > 0; }

  // Throws FormatError if absent or if the shape does not match (when given).
  const Eigen::MatrixXd &Get(const std::string &name) const;
  Eigen::MatrixXd Get(const std::string &name, Eigen::Index rows,
                      Eigen::Index cols) const;
  Eigen::VectorXd GetVector(const std::string &name, Eigen::Index size) const;

  const std::map<std::string, Eigen::MatrixXd> &tensors() const {
    return tensors_;
  }
  std::map<std::string, Eigen::MatrixXd> &mutable_tensors() { return tensors_; }

  void Write(const std::string &path,
             TensorDType dtype = TensorDType::kFloat64) const;
  static TensorBundle Read(const std::string &path);

 private:
  std::map<std::string, Eigen::MatrixXd> tensors_;
};

}  // namespace claimlens

#endif  // CLAIMLENS_TENSOR_IO_H_
