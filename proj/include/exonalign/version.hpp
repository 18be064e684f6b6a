#pragma once

namespace exonalign {

inline const char* version_string()
{
    return "exonalign 0.1.0";
}

} // namespace exonalign
