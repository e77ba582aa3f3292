#pragma once

#include <stdexcept>
#include <string>

namespace avse {

/// Base of every error thrown by the library. `kind()` is a stable tag used
/// by the command-line front end to pick an exit code.
class Error : public std::runtime_error {
 public:
  enum class Kind {
    kShape,
    kConfig,
    kInputTooShort,
    kEmptySequence,
    kDegenerateSignal,
    kInsufficientSignal,
    kUnsupportedFormat,
    kCorruptFile,
    kIo,
    kParse,
    kSchema,
    kNumeric,
  };

  Error(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

#define AVSE_DEFINE_ERROR(Name, KindTag)                              \
  class Name : public Error {                                         \
   public:                                                            \
    explicit Name(const std::string& what) : Error(KindTag, what) {}  \
  };

AVSE_DEFINE_ERROR(ShapeError, Kind::kShape)
AVSE_DEFINE_ERROR(ConfigError, Kind::kConfig)
AVSE_DEFINE_ERROR(InputTooShortError, Kind::kInputTooShort)
AVSE_DEFINE_ERROR(EmptySequenceError, Kind::kEmptySequence)
AVSE_DEFINE_ERROR(DegenerateSignalError, Kind::kDegenerateSignal)
AVSE_DEFINE_ERROR(InsufficientSignalError, Kind::kInsufficientSignal)
AVSE_DEFINE_ERROR(UnsupportedFormatError, Kind::kUnsupportedFormat)
AVSE_DEFINE_ERROR(CorruptFileError, Kind::kCorruptFile)
AVSE_DEFINE_ERROR(IoError, Kind::kIo)
AVSE_DEFINE_ERROR(ParseError, Kind::kParse)
AVSE_DEFINE_ERROR(SchemaError, Kind::kSchema)
AVSE_DEFINE_ERROR(NumericError, Kind::kNumeric)

#undef AVSE_DEFINE_ERROR

}  // namespace avse
