#pragma once

#include <stdexcept>
#include <string>

namespace kermit {

/// Root of every error thrown by the library. The class name is the
/// machine-readable error kind reported by the CLI.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(what), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

#define KERMIT_DEFINE_ERROR(Name)                                              \
    class Name : public Error {                                                \
    public:                                                                    \
        explicit Name(const std::string& what) : Error(#Name, what) {}         \
    }

KERMIT_DEFINE_ERROR(PreconditionError);
KERMIT_DEFINE_ERROR(EmptyWindow);
KERMIT_DEFINE_ERROR(NonConsecutive);
KERMIT_DEFINE_ERROR(TooFewWindows);
KERMIT_DEFINE_ERROR(NotFound);
KERMIT_DEFINE_ERROR(UnknownStream);
KERMIT_DEFINE_ERROR(CorruptRecord);
KERMIT_DEFINE_ERROR(SchemaMismatch);
KERMIT_DEFINE_ERROR(EmptyTrainingSet);
KERMIT_DEFINE_ERROR(DimensionMismatch);
KERMIT_DEFINE_ERROR(NoPureClasses);
KERMIT_DEFINE_ERROR(LabelCollision);
KERMIT_DEFINE_ERROR(TooShort);
KERMIT_DEFINE_ERROR(OutOfOrder);
KERMIT_DEFINE_ERROR(InvalidScenario);
KERMIT_DEFINE_ERROR(IndexMismatch);
KERMIT_DEFINE_ERROR(NoReport);
KERMIT_DEFINE_ERROR(IoError);

#undef KERMIT_DEFINE_ERROR

}  // namespace kermit
