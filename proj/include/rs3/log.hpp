#pragma once

#include <functional>
#include <iostream>
#include <mutex>
#include <string>
#include <string_view>

namespace rs3 {

using WarningSink = std::function<void(std::string_view)>;

namespace detail {

inline std::mutex& warning_mutex()
{
    static std::mutex m;
    return m;
}

inline WarningSink& warning_sink()
{
    static WarningSink sink = [](std::string_view msg) { std::clog << "[rs3] warning: " << msg << '\n'; };
    return sink;
}

} // namespace detail

/// Replace the warning sink (e.g. to silence or capture warnings in tests).
inline void set_warning_sink(WarningSink sink)
{
    std::lock_guard lock(detail::warning_mutex());
    detail::warning_sink() = std::move(sink);
}

inline void warn(std::string_view message)
{
    std::lock_guard lock(detail::warning_mutex());
    if (detail::warning_sink())
        detail::warning_sink()(message);
}

} // namespace rs3
