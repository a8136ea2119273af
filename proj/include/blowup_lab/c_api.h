#ifndef BLOWUP_LAB_C_API_H
#define BLOWUP_LAB_C_API_H

#ifdef __cplusplus
extern "C" {
#endif

typedef struct blab_session blab_session;

typedef enum blab_status {
  BLAB_OK = 0,
  BLAB_ERR_PARAMETER = 1,  /* bad arguments */
  BLAB_ERR_UNSUPPORTED = 2,
  BLAB_ERR_NUMERICAL = 3,  /* a solver, fit or probe failed */
  BLAB_ERR_IO = 4,
  BLAB_ERR_INTERNAL = 5
} blab_status;

const char* blab_version(void);

/* defaults_json: object merged under every command's arguments; may be NULL */
blab_status blab_session_create(const char* defaults_json, blab_session** out);
void blab_session_destroy(blab_session* s);

/*
 * command: stationary | linop | profiles | modulation | simulate | verify | pipeline
 * args_json: object of command arguments (snake_case keys); may be NULL
 * result_json: receives a heap string owned by the caller, release with blab_string_free
 */
blab_status blab_run(blab_session* s, const char* command, const char* args_json, char** result_json);

/* message for the last failing call on this session; empty when none */
const char* blab_last_error(const blab_session* s);

void blab_string_free(char* p);

#ifdef __cplusplus
}
#endif

#endif
