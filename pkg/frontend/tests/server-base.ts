export const SERVER_PORT = 8919;
export const BASE = `http://127.0.0.1:${SERVER_PORT}`;
