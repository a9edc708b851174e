#pragma once

#include <stdexcept>
#include <string>

namespace imdial {

// Every failure raised by the library derives from Error so callers can
// catch broadly at the CLI boundary and narrowly in tests.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define IMDIAL_DEFINE_ERROR(Name)          \
  class Name : public Error {              \
   public:                                 \
    using Error::Error;                    \
  }

IMDIAL_DEFINE_ERROR(ConfigError);
IMDIAL_DEFINE_ERROR(DomainError);
IMDIAL_DEFINE_ERROR(ConstraintError);
IMDIAL_DEFINE_ERROR(ActError);
IMDIAL_DEFINE_ERROR(TemplateError);
IMDIAL_DEFINE_ERROR(StateError);
IMDIAL_DEFINE_ERROR(EncodingError);
IMDIAL_DEFINE_ERROR(CatalogError);
IMDIAL_DEFINE_ERROR(ShapeError);
IMDIAL_DEFINE_ERROR(TapeError);
IMDIAL_DEFINE_ERROR(NumericError);
IMDIAL_DEFINE_ERROR(ArgumentError);

#undef IMDIAL_DEFINE_ERROR

}  // namespace imdial
