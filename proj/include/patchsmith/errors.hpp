#pragma once

#include <stdexcept>
#include <string>

namespace patchsmith {

/// Base of every error raised by the kernel. `kind()` is the stable name
/// reported by the CLI and the session protocol.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define PATCHSMITH_DEFINE_ERROR(Name)                               \
  class Name : public Error {                                       \
   public:                                                          \
    explicit Name(const std::string& what) : Error(#Name, what) {}  \
  };

PATCHSMITH_DEFINE_ERROR(IoError)
PATCHSMITH_DEFINE_ERROR(ParseError)
PATCHSMITH_DEFINE_ERROR(ManifoldError)
PATCHSMITH_DEFINE_ERROR(OrientationError)
PATCHSMITH_DEFINE_ERROR(BoundaryError)
PATCHSMITH_DEFINE_ERROR(CornerError)
PATCHSMITH_DEFINE_ERROR(TopologyError)
PATCHSMITH_DEFINE_ERROR(DegenerateFrameError)
PATCHSMITH_DEFINE_ERROR(ParamError)
PATCHSMITH_DEFINE_ERROR(AssemblyError)
PATCHSMITH_DEFINE_ERROR(KernelDerivationError)
PATCHSMITH_DEFINE_ERROR(TessellationError)
PATCHSMITH_DEFINE_ERROR(AnalysisError)
PATCHSMITH_DEFINE_ERROR(ConflictError)

#undef PATCHSMITH_DEFINE_ERROR

}  // namespace patchsmith
