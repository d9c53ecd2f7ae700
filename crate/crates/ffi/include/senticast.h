/* C interface to the senticast sentiment scoring and forecasting library. */

#ifndef SENTICAST_H
#define SENTICAST_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum SenticastStatus {
  /**
   * The call succeeded.
   */
  SENTICAST_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  SENTICAST_STATUS_NULL_POINTER = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  SENTICAST_STATUS_INVALID_UTF8 = 2,
  /**
   * An argument was out of range or inconsistent.
   */
  SENTICAST_STATUS_INVALID_INPUT = 3,
  /**
   * Training diverged or could not run on the given data.
   */
  SENTICAST_STATUS_TRAINING_FAILED = 4,
  /**
   * An unexpected internal failure; please report it.
   */
  SENTICAST_STATUS_INTERNAL_ERROR = 5,
} SenticastStatus;

/**
 * Which scoring dictionary to apply.
 */
typedef enum SenticastLibrary {
  /**
   * Valence-sum scoring with bounded normalization.
   */
  SENTICAST_LIBRARY_VADER = 0,
  /**
   * General positive/negative word counting.
   */
  SENTICAST_LIBRARY_HIV4 = 1,
  /**
   * Finance-specific positive/negative word counting.
   */
  SENTICAST_LIBRARY_LM = 2,
} SenticastLibrary;

/**
 * Opaque trained forecaster: the network, its feature scaler and the
 * trailing input window it forecasts from.
 */
typedef struct SenticastForecaster SenticastForecaster;

/**
 * Opaque bundle of the three scoring dictionaries.
 */
typedef struct SenticastLexicons SenticastLexicons;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * The library version as a static nul-terminated string.
 */
const char *senticast_version(void);

/**
 * Description of the most recent failure on this thread, or an empty
 * string. The pointer stays valid until the next failing call on the
 * same thread.
 */
const char *senticast_last_error(void);

/**
 * Create a handle to the built-in scoring dictionaries. Free it with
 * [`senticast_lexicons_free`]. Never returns null.
 */
struct SenticastLexicons *senticast_bundled_lexicons(void);

/**
 * Release a lexicon handle. Passing null is a no-op.
 *
 * # Safety
 * `lexicons` must be a pointer previously returned by
 * [`senticast_bundled_lexicons`] that has not been freed already.
 */
void senticast_lexicons_free(struct SenticastLexicons *lexicons);

/**
 * Score a nul-terminated UTF-8 text with one dictionary, writing a value
 * in [-1, 1] to `out_score`.
 *
 * # Safety
 * `lexicons` must be a live handle from [`senticast_bundled_lexicons`];
 * `text` must point to a nul-terminated string; `out_score` must point to
 * writable memory for one double.
 */
enum SenticastStatus senticast_score_text(const struct SenticastLexicons *lexicons,
                                          const char *text,
                                          enum SenticastLibrary library,
                                          double *out_score);

/**
 * Train a forecaster on a row-major `rows x feature_count` matrix whose
 * first column is the series to forecast (the close); remaining columns
 * are auxiliary features. Columns are min-max scaled over the supplied
 * rows, the series is cut into `lookback`-long windows targeting the next
 * row, and a three-layer recurrent network is fitted for `epochs` passes.
 * On success `*out_forecaster` receives a handle to free with
 * [`senticast_forecaster_free`].
 *
 * # Safety
 * `values` must point to `rows * feature_count` doubles;
 * `out_forecaster` must point to writable memory for one pointer.
 */
enum SenticastStatus senticast_forecaster_train(const double *values,
                                                uintptr_t rows,
                                                uintptr_t feature_count,
                                                uintptr_t lookback,
                                                uintptr_t epochs,
                                                uintptr_t batch_size,
                                                double learning_rate,
                                                uint64_t seed,
                                                struct SenticastForecaster **out_forecaster);

/**
 * Forecast the next `horizon` values of the close series, in the units
 * the training data used.
 *
 * # Safety
 * `forecaster` must be a live handle from
 * [`senticast_forecaster_train`]; `out_values` must point to writable
 * memory for `horizon` doubles.
 */
enum SenticastStatus senticast_forecaster_predict(const struct SenticastForecaster *forecaster,
                                                  uintptr_t horizon,
                                                  double *out_values);

/**
 * Release a forecaster handle. Passing null is a no-op.
 *
 * # Safety
 * `forecaster` must be a pointer previously returned by
 * [`senticast_forecaster_train`] that has not been freed already.
 */
void senticast_forecaster_free(struct SenticastForecaster *forecaster);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SENTICAST_H */
